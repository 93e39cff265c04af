use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{BclError, Result};
use crate::numerics::ParamStore;

/// Stores larger than this are checked on a random subsample.
const FULL_CHECK_LIMIT: usize = 400;
const SUBSAMPLE: usize = 200;

/// Compares analytic gradients against central finite differences.
///
/// `loss_fn` must evaluate the scalar loss at the current parameter values and
/// accumulate its analytic gradient into the store. Returns the maximum over
/// checked entries of `|analytic − numeric| / max(1, |analytic|, |numeric|)`.
pub fn grad_check<F>(params: &mut ParamStore, perturbation: f64, seed: u64, mut loss_fn: F) -> Result<f64>
where
    F: FnMut(&mut ParamStore) -> Result<f64>,
{
    if !(1e-7..=1e-3).contains(&perturbation) {
        return Err(BclError::InvalidArgument(format!(
            "perturbation {perturbation} outside [1e-7, 1e-3]"
        )));
    }
    params.zero_grads();
    let base = loss_fn(params)?;
    if !base.is_finite() {
        return Err(BclError::NonFinite("grad_check base loss".into()));
    }
    let analytic = params.clone();
    params.zero_grads();

    // flat (name, index) list in store order
    let mut entries = Vec::new();
    for (name, p) in analytic.iter() {
        for k in 0..p.value.len() {
            entries.push((name.to_string(), k));
        }
    }
    let chosen: Vec<usize> = if entries.len() > FULL_CHECK_LIMIT {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, entries.len(), SUBSAMPLE).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..entries.len()).collect()
    };

    let mut worst: f64 = 0.0;
    for i in chosen {
        let (name, k) = &entries[i];
        let original = params.value(name)?.values()[*k];

        params.value_mut(name)?.values_mut()[*k] = original + perturbation;
        let plus = loss_fn(params)?;
        params.value_mut(name)?.values_mut()[*k] = original - perturbation;
        let minus = loss_fn(params)?;
        params.value_mut(name)?.values_mut()[*k] = original;
        params.zero_grads();

        if !plus.is_finite() || !minus.is_finite() {
            return Err(BclError::NonFinite(format!("grad_check loss at {name}[{k}]")));
        }
        let numeric = (plus - minus) / (2.0 * perturbation);
        let exact = analytic.grad(name)?.values()[*k];
        let rel = (exact - numeric).abs() / 1f64.max(exact.abs()).max(numeric.abs());
        worst = worst.max(rel);
    }
    Ok(worst)
}
