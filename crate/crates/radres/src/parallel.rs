//! Sample fan-out over a rayon pool.
//!
//! Work is cut into fixed index blocks that do not depend on the number of
//! workers, and block results are merged in index order, so every result is
//! identical for any `--workers`.

use std::ops::Range;
use std::time::Instant;

use radres_core::restriction::RestrictionLaw;
use radres_core::sampler::{
    checkpoint_times, geometric_tally, martingale_report, martingale_sums, product_z, report, tally, EstimateReport, FlowConfig, MartingaleReport,
    MartingaleSums, McConfig, SampleConfig, Tally, TestHull,
};
use rayon::prelude::*;

use crate::error::{CliError, Result};

const BLOCK: u64 = 64;

pub fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::usage(format!("cannot start {workers} workers: {e}")))
}

fn blocks(n: u64) -> Vec<Range<u64>> {
    (0..n.div_ceil(BLOCK)).map(|b| b * BLOCK..((b + 1) * BLOCK).min(n)).collect()
}

/// Runs `f` on every block in parallel and returns the results in block order.
fn map_blocks<T: Send>(pool: &rayon::ThreadPool, n: u64, f: impl Fn(Range<u64>) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    pool.install(|| blocks(n).into_par_iter().map(f).collect())
}

pub fn par_tally(pool: &rayon::ThreadPool, law: RestrictionLaw, hull: &TestHull, cfg: &McConfig, seed: u64, n: u64) -> Result<Tally> {
    let parts = map_blocks(pool, n, |r| Ok(tally(law, hull, cfg, seed, r)?))?;
    Ok(parts.into_iter().fold(Tally::default(), Tally::merge))
}

/// Flow-engine estimates for each hull, with wall time.
pub fn par_estimate(
    pool: &rayon::ThreadPool,
    law: RestrictionLaw,
    hulls: &[TestHull],
    n: u64,
    cfg: &McConfig,
    seed: u64,
) -> Result<Vec<EstimateReport>> {
    hulls
        .iter()
        .map(|h| {
            let start = Instant::now();
            let t = par_tally(pool, law, h, cfg, seed, n)?;
            let mut r = report(law, h, t, cfg.flow.dt, seed);
            r.wall_ms = Some(start.elapsed().as_millis() as u64);
            Ok(r)
        })
        .collect()
}

/// Estimates from explicit samples; each sample is tested against every hull.
pub fn par_geometric(
    pool: &rayon::ThreadPool,
    law: RestrictionLaw,
    hulls: &[TestHull],
    n: u64,
    cfg: &SampleConfig,
    seed: u64,
) -> Result<Vec<EstimateReport>> {
    let start = Instant::now();
    let parts = map_blocks(pool, n, |r| Ok(geometric_tally(law, hulls, cfg, seed, r)?))?;
    let mut sums = vec![Tally::default(); hulls.len()];
    for part in parts {
        for (s, t) in sums.iter_mut().zip(part) {
            *s = s.merge(t);
        }
    }
    let ms = start.elapsed().as_millis() as u64;
    Ok(hulls.iter().zip(sums).map(|(h, t)| EstimateReport { wall_ms: Some(ms), ..report(law, h, t, cfg.dt, seed) }).collect())
}

#[allow(clippy::too_many_arguments)]
pub fn par_martingale(
    pool: &rayon::ThreadPool,
    rho: f64,
    hull: &TestHull,
    cfg: FlowConfig,
    t_end: f64,
    checkpoints: usize,
    n: u64,
    seed: u64,
) -> Result<MartingaleReport> {
    let times = checkpoint_times(t_end, checkpoints);
    let parts = map_blocks(pool, n, |r| Ok(martingale_sums(rho, hull, cfg, &times, seed, r)?))?;
    let sums = parts.into_iter().fold(MartingaleSums::default(), MartingaleSums::merge);
    Ok(martingale_report(rho, hull, cfg, times, &sums)?)
}

/// Restriction property check for hulls `A` and `B`: returns
/// `[p_A, p_B, p_{A∪Φ_A⁻¹(B)}]` and the z-score of the product identity.
pub fn par_restriction_property(
    pool: &rayon::ThreadPool,
    law: RestrictionLaw,
    a: &TestHull,
    b: &TestHull,
    n: u64,
    cfg: &McConfig,
    seed: u64,
) -> Result<([f64; 3], f64)> {
    let ab = a.with_preimage(b)?;
    let ta = par_tally(pool, law, a, cfg, seed, n)?;
    let tb = par_tally(pool, law, b, cfg, seed.wrapping_add(1), n)?;
    let tab = par_tally(pool, law, &ab, cfg, seed.wrapping_add(2), n)?;
    Ok(product_z(ta, tb, tab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn blocks_cover_the_range() {
        let b = blocks(130);
        assert_eq!(b.len(), 3);
        assert_eq!(b[2], 128..130);
        assert!(blocks(0).is_empty());
    }

    #[test]
    fn results_do_not_depend_on_workers() {
        let law = RestrictionLaw::new(5.0 / 48.0, 0.625);
        let h = TestHull::perfect(PI / 2.0, 0.2).unwrap();
        let cfg = McConfig::default();
        let one = par_tally(&pool(1).unwrap(), law, &h, &cfg, 4, 150).unwrap();
        let three = par_tally(&pool(3).unwrap(), law, &h, &cfg, 4, 150).unwrap();
        assert_eq!(one, three);
        assert_eq!(one, tally(law, &h, &cfg, 4, 0..150).unwrap());
    }
}
