//! Synthetic fixture generator: a daily price table with an index price and
//! eleven market/commodity covariate prices, in the schema the ingestion
//! pipeline expects (date column, price levels to be log-return
//! transformed). Sample period and frequency are synthetic — the real
//! studies this mimics do not document theirs, so a fake 30-day/12-month
//! calendar starting in 2010 is used.

use std::sync::Arc;

use archmx::{
    derive_seed, sample_covariates, simulate_arch_mx, ArchMxSpec, CovariateLaw, Shock,
};

pub const FIXTURE_COVARIATES: [&str; 11] = [
    "china_market",
    "asia_market",
    "crude_oil",
    "usd_index",
    "gold",
    "copper",
    "silver",
    "steel",
    "rice",
    "wheat",
    "europe_market",
];

pub(crate) fn fake_date(i: usize) -> String {
    let year = 2010 + i / 360;
    let month = (i % 360) / 30 + 1;
    let day = (i % 30) + 1;
    format!("{year:04}-{month:02}-{day:02}")
}

/// Generate the fixture CSV content: `n` price rows (so n-1 return rows
/// after the log-return transform). Returns drive a small-scale ARCH
/// recursion whose variance loads on three of the covariates.
pub fn fixture_csv(n: usize, seed: u64) -> Result<String, archmx::Error> {
    let d = FIXTURE_COVARIATES.len();
    let law = CovariateLaw::new(d, 0.0, 0.3)?;
    // one extra row: row t is the return from price t to t+1
    let panel = sample_covariates(&law, n, derive_seed(seed, &[1]))?;
    let spec = ArchMxSpec::new(
        vec![0.2],
        Arc::new(|x: &[f64]| 0.25 * (1.0 + 0.5 * x[0] * x[0] + 0.3 * x[2] * x[2] + 0.3 * x[4] * x[4])),
        Shock::Normal,
    )?;
    let series = simulate_arch_mx(&spec, &panel, &law, derive_seed(seed, &[2]), 500)?;

    const RET_SCALE: f64 = 0.01; // shrink unit-scale draws to daily-return size
    let mut out = String::from("date,index_price");
    for name in FIXTURE_COVARIATES {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');

    let mut index_log = (100.0_f64).ln();
    let mut cov_log = vec![(100.0_f64).ln(); d];
    for t in 0..n {
        out.push_str(&fake_date(t));
        out.push_str(&format!(",{}", index_log.exp()));
        for l in &cov_log {
            out.push_str(&format!(",{}", l.exp()));
        }
        out.push('\n');
        if t + 1 < n {
            index_log += RET_SCALE * series.values()[t];
            for (j, l) in cov_log.iter_mut().enumerate() {
                *l += RET_SCALE * panel.row(t)[j];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shape_and_determinism() {
        let a = fixture_csv(50, 9).unwrap();
        let b = fixture_csv(50, 9).unwrap();
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines.len(), 51);
        assert!(lines[0].starts_with("date,index_price,china_market,"));
        assert_eq!(lines[0].split(',').count(), 13);
        // dates strictly increasing lexicographically
        let dates: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
        for w in dates.windows(2) {
            assert!(w[0] < w[1]);
        }
    }
}
