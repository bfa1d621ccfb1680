//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration.

use std::f64::consts::PI;

/// An n-point Gauss–Legendre rule mapped to the open unit interval.
///
/// All nodes are strictly interior, so integrands with integrable
/// singularities on the boundary of the unit square are never evaluated there.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule on [-1, 1], nodes ascending.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Rule on (0, 1).
    pub fn unit(n: usize) -> Self {
        let base = Self::new(n);
        Self {
            nodes: base.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: base.weights.iter().map(|w| 0.5 * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Tensor-product integral of `f` over the unit square, using this rule
    /// (which must be a unit-interval rule) on both axes.
    pub fn integrate_square<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let mut total = 0.0;
        for (&x, &wx) in self.nodes.iter().zip(&self.weights) {
            let mut row = 0.0;
            for (&y, &wy) in self.nodes.iter().zip(&self.weights) {
                row += wy * f(x, y);
            }
            total += wx * row;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite tensor Gauss–Legendre over the unit square: `panels`² equal
/// sub-squares, each with an `order`² rule.
pub fn composite_square<F: FnMut(f64, f64) -> f64>(panels: usize, order: usize, mut f: F) -> f64 {
    let base = GaussLegendre::new(order);
    let h = 1.0 / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let left = p as f64 * h;
        for (&x, &w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(left + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    GaussLegendre { nodes, weights }.integrate_square(&mut f)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod value, |Kronrod − Gauss| and the Kronrod rule applied to |f|.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let (fl, fr) = (f(c - dx), f(c + dx));
        let s = fl + fr;
        kronrod += WGK[j] * s;
        abs += WGK[j] * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs(), (abs * h).abs())
}

/// Subdivision budget; past it the remaining pieces are accepted as they are.
const MAX_INTERVALS: usize = 5000;

/// Adaptive 15-point Gauss–Kronrod integration of `f` over [a, b] to an
/// absolute error estimate of `tol`. Handles a > b by sign.
pub fn adaptive_gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut total = 0.0;
    let mut intervals = 1;
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((lo, hi, eps, depth)) = stack.pop() {
        let (value, err, abs) = gk15(&mut f, lo, hi);
        // an error estimate at rounding level cannot be improved by splitting
        let roundoff = 50.0 * f64::EPSILON * abs;
        if err <= eps || err <= roundoff || depth >= 50 || intervals >= MAX_INTERVALS {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * eps, depth + 1));
            stack.push((lo, mid, 0.5 * eps, depth + 1));
            intervals += 1;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 20, 64, 200] {
            let rule = GaussLegendre::new(n);
            assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            // ∫ x^(2n-2) over [-1,1] = 2/(2n-1)
            let deg = 2 * n - 2;
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * x.powi(deg as i32))
                .sum();
            assert!((got - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "n={n}");
            assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn unit_rule_nodes_are_interior() {
        let rule = GaussLegendre::unit(400);
        assert!(rule.nodes.iter().all(|&x| x > 0.0 && x < 1.0));
        let area = rule.integrate_square(|x, y| x * y);
        assert!((area - 0.25).abs() < 1e-14);
    }

    #[test]
    fn gauss_kronrod_integrates_smooth_functions() {
        let v = adaptive_gauss_kronrod(f64::exp, 0.0, 1.0, 1e-14);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
        let v = adaptive_gauss_kronrod(|x| x.sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
        let back = adaptive_gauss_kronrod(f64::exp, 1.0, 0.0, 1e-14);
        assert!((back + (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn composite_matches_single_rule_on_smooth() {
        let f = |x: f64, y: f64| (x * y).sin() + x * x;
        let a = composite_square(4, 10, f);
        let b = GaussLegendre::unit(40).integrate_square(f);
        assert!((a - b).abs() < 1e-13);
    }
}
