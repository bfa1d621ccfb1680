use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};

use super::{frank, gumbel, CopulaFamily, CopulaModel, UnitPair};
use crate::rng::RngStream;
use crate::special::normal_cdf;

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Rounding can push a draw onto 0 or 1; nudge it back inside.
#[inline]
fn into_open_unit(u: f64) -> f64 {
    if u >= 1.0 {
        BELOW_ONE
    } else if u <= 0.0 {
        f64::MIN_POSITIVE
    } else {
        u
    }
}

impl CopulaModel {
    /// `n` independent draws from the copula.
    ///
    /// Gaussian: correlated normal pair mapped through Φ. Frank: inversion of
    /// the conditional distribution of u₂ given u₁. Gumbel: Marshall–Olkin
    /// frailty construction with a positive stable(1/θ) mixing variable.
    pub fn sample(&self, n: usize, stream: &mut RngStream) -> Vec<UnitPair> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let (u, v) = self.draw(stream);
            out.push(UnitPair {
                u1: into_open_unit(u),
                u2: into_open_unit(v),
            });
        }
        out
    }

    fn draw(&self, stream: &mut RngStream) -> (f64, f64) {
        let theta = self.theta;
        match self.family {
            CopulaFamily::Gaussian => {
                let z1: f64 = StandardNormal.sample(stream);
                let e: f64 = StandardNormal.sample(stream);
                let z2 = theta * z1 + ((1.0 - theta) * (1.0 + theta)).sqrt() * e;
                (normal_cdf(z1), normal_cdf(z2))
            }
            CopulaFamily::Frank => {
                let u = stream.open01();
                let p = stream.open01();
                (u, frank::conditional_inverse(theta, u, p))
            }
            CopulaFamily::Gumbel => {
                let alpha = 1.0 / theta;
                let angle = PI * stream.open01();
                let w = stream.exp1();
                let frailty = gumbel::positive_stable(alpha, angle, w);
                let e1 = stream.exp1();
                let e2 = stream.exp1();
                (
                    (-(e1 / frailty).powf(alpha)).exp(),
                    (-(e2 / frailty).powf(alpha)).exp(),
                )
            }
        }
    }
}
