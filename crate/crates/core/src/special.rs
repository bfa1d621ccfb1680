//! Special functions: the standard normal distribution, the bivariate normal
//! CDF and the Debye functions used by the Frank copula.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::quadrature::adaptive_gauss_kronrod;

const TWO_PI: f64 = 2.0 * PI;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density φ(x).
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF Φ(x), accurate in both tails.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile Φ⁻¹(p) for p in (0, 1).
///
/// The statrs inverse is only good to about 1e-10 relative, so its value is
/// polished with one Halley step against [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
    if p > 0.5 {
        // 1 − p is exact here
        return -normal_quantile(1.0 - p);
    }
    if p == 0.5 {
        return 0.0;
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    if !x.is_finite() {
        return x;
    }
    let t = (normal_cdf(x) - p) / normal_pdf(x);
    x - t / (1.0 + 0.5 * x * t)
}

// Gauss-Legendre half-rules (weight, abscissa) on [-1, 1] used by Genz's BVND.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197_0),
];

const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];

const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

/// Upper bivariate normal probability P(X > h, Y > k) for a standard normal
/// pair with correlation `r`.
///
/// Genz's BVND: Drezner–Wesolowsky Gauss–Legendre integration of the
/// Plackett identity for |r| < 0.925 and an asymptotic expansion in
/// `sqrt(1 - r^2)` for |r| near one. Double precision over the whole range.
pub fn bvnd(h: f64, k: f64, r: f64) -> f64 {
    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };

    let mut hk = h * k;
    let mut bvn = 0.0;

    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = r.asin();
        for &(w, x) in rule {
            let sn = (asr * (x + 1.0) * 0.5).sin();
            bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            let sn = (asr * (1.0 - x) * 0.5).sin();
            bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
        return bvn * asr / (2.0 * TWO_PI) + normal_cdf(-h) * normal_cdf(-k);
    }

    let k = if r < 0.0 {
        hk = -hk;
        -k
    } else {
        k
    };

    if r.abs() < 1.0 {
        let a_sq = (1.0 - r) * (1.0 + r);
        let mut a = a_sq.sqrt();
        let b_sq = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * (-0.5 * (b_sq / a_sq + hk)).exp()
            * (1.0 - c * (b_sq - a_sq) * (1.0 - d * b_sq / 5.0) / 3.0 + c * d * a_sq * a_sq / 5.0);
        if hk > -160.0 {
            let b = b_sq.sqrt();
            bvn -= (-0.5 * hk).exp()
                * TWO_PI.sqrt()
                * normal_cdf(-b / a)
                * b
                * (1.0 - c * b_sq * (1.0 - d * b_sq / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in rule {
            for xi in [x, -x] {
                let xs = (a * (xi + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (b_sq / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / TWO_PI;
    }

    if r > 0.0 {
        bvn + normal_cdf(-h.max(k))
    } else {
        let mut bvn = -bvn;
        if k > h {
            if h < 0.0 {
                bvn += normal_cdf(k) - normal_cdf(h);
            } else {
                bvn += normal_cdf(-h) - normal_cdf(-k);
            }
        }
        bvn
    }
}

/// Lower bivariate normal CDF P(X ≤ x, Y ≤ y) with correlation `rho`.
#[inline]
pub fn bivariate_normal_cdf(x: f64, y: f64, rho: f64) -> f64 {
    bvnd(-x, -y, rho).clamp(0.0, 1.0)
}

/// Debye function D_n(x) = n / x^n ∫₀ˣ tⁿ / (eᵗ − 1) dt, for any real x.
///
/// Evaluated by adaptive Gauss–Kronrod quadrature to 1e-12 absolute.
pub fn debye(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let integrand = |t: f64| {
        if t == 0.0 {
            if n == 1 {
                1.0
            } else {
                0.0
            }
        } else {
            t.powi(n as i32) / t.exp_m1()
        }
    };
    let integral = adaptive_gauss_kronrod(integrand, 0.0, x, 1e-13);
    f64::from(n) * integral / x.powi(n as i32)
}
