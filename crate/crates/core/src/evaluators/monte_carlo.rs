use rayon::prelude::*;

use super::normal_approx_error;
use crate::model::{mu_factor, BlockAllocation, ErrorProbEstimate, Method, SystemParams};
use crate::rng::RandomStream;
use crate::specfun::sample_std_gamma;
use crate::{Error, Result};

/// Samples drawn from one child stream. Block `i` always uses
/// `stream.split(i)`, so the estimate does not depend on thread count.
pub const MC_BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Sample mean of the normal-approximation error over independent fading
/// draws `h~, g~ ~ Gamma(m, 1)`.
pub fn eps_monte_carlo(
    params: &SystemParams,
    alloc: &BlockAllocation,
    samples: u64,
    stream: &RandomStream,
) -> Result<ErrorProbEstimate> {
    params.validate()?;
    if samples == 0 {
        return Err(Error::invalid("samples", "must be >= 1"));
    }
    let mu = mu_factor(params, alloc.v(), alloc.n());
    let rate = alloc.rate();
    let n = alloc.n() as f64;
    let m = params.m;
    let blocks = samples.div_ceil(MC_BLOCK);

    let parts: Vec<Result<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut rng = stream.split(b).rng();
            let mut mom = Moments::default();
            for _ in 0..len {
                let h = sample_std_gamma(m, &mut rng)?;
                let g = sample_std_gamma(m, &mut rng)?;
                mom.push(normal_approx_error(mu * h * g, rate, n));
            }
            Ok(mom)
        })
        .collect();

    let mut total = Moments::default();
    for p in parts {
        total = total.merge(p?);
    }
    let var = if total.count > 1.0 {
        total.m2 / (total.count - 1.0)
    } else {
        0.0
    };
    Ok(ErrorProbEstimate::new(
        total.mean,
        Method::MonteCarlo,
        (var / total.count).sqrt(),
    ))
}
