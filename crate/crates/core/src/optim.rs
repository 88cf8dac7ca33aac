//! Derivative-free minimization by quadratic approximation inside a trust
//! region.
//!
//! Each iteration interpolates a full quadratic model through
//! `(d + 1)(d + 2) / 2` points of a stencil of radius `Δ` around the
//! current iterate (centre, `±Δ e_i`, and `Δ(e_i + e_j)` for `i < j`),
//! minimizes the model inside the ball of radius `Δ`, and updates `Δ` from
//! the ratio of actual to predicted reduction.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct TrustRegionOptions {
    pub initial_radius: f64,
    pub min_radius: f64,
    pub max_radius: f64,
    pub max_evaluations: usize,
}

impl Default for TrustRegionOptions {
    fn default() -> Self {
        Self {
            initial_radius: 0.5,
            min_radius: 1e-6,
            max_radius: 4.0,
            max_evaluations: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Radius fell below `min_radius` (as opposed to hitting the budget).
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evals: usize,
    best_x: DVector<f64>,
    best_f: f64,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &DVector<f64>) -> f64 {
        self.evals += 1;
        let v = (self.f)(x.as_slice());
        if v < self.best_f {
            self.best_f = v;
            self.best_x = x.clone();
        }
        v
    }
}

/// Minimizes `f` starting from `x0`. A non-finite objective value stops
/// the search and is reported through `value`.
pub fn minimize<F>(f: F, x0: &[f64], opts: TrustRegionOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let d = x0.len();
    let mut obj = Counted {
        f,
        evals: 0,
        best_x: DVector::from_column_slice(x0),
        best_f: f64::INFINITY,
    };
    let mut x = DVector::from_column_slice(x0);
    let mut fx = obj.eval(&x);
    if d == 0 || !fx.is_finite() {
        return Minimum {
            x: x.iter().copied().collect(),
            value: fx,
            evaluations: obj.evals,
            converged: d == 0,
        };
    }
    let mut radius = opts.initial_radius;
    let mut converged = false;
    while obj.evals < opts.max_evaluations {
        if radius < opts.min_radius {
            converged = true;
            break;
        }
        let (g, b) = quadratic_model(&mut obj, &x, fx, radius);
        let step = trust_region_step(&g, &b, radius);
        let predicted = -(g.dot(&step) + 0.5 * step.dot(&(&b * &step)));
        let candidate = &x + &step;
        let f_new = if predicted > 0.0 {
            obj.eval(&candidate)
        } else {
            f64::INFINITY
        };
        if f_new.is_nan() {
            fx = f_new;
            break;
        }
        let rho = if predicted > 0.0 {
            (fx - f_new) / predicted
        } else {
            -1.0
        };
        if rho > 0.1 {
            x = candidate;
            fx = f_new;
        }
        // A stencil point may beat the model step.
        if obj.best_f < fx {
            x = obj.best_x.clone();
            fx = obj.best_f;
        }
        if rho > 0.75 && step.norm() > 0.99 * radius {
            radius = (2.0 * radius).min(opts.max_radius);
        } else if rho < 0.25 {
            radius *= 0.5;
        }
    }
    Minimum {
        x: x.iter().copied().collect(),
        value: fx,
        evaluations: obj.evals,
        converged,
    }
}

/// Gradient and Hessian of the quadratic interpolating `f` on the stencil.
fn quadratic_model<F: FnMut(&[f64]) -> f64>(
    obj: &mut Counted<F>,
    x: &DVector<f64>,
    fx: f64,
    h: f64,
) -> (DVector<f64>, DMatrix<f64>) {
    let d = x.len();
    let mut g = DVector::zeros(d);
    let mut b = DMatrix::zeros(d, d);
    let mut plus = vec![0.0; d];
    for i in 0..d {
        let mut xp = x.clone();
        xp[i] += h;
        let mut xm = x.clone();
        xm[i] -= h;
        let fp = obj.eval(&xp);
        let fm = obj.eval(&xm);
        plus[i] = fp;
        g[i] = (fp - fm) / (2.0 * h);
        b[(i, i)] = (fp - 2.0 * fx + fm) / (h * h);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut xij = x.clone();
            xij[i] += h;
            xij[j] += h;
            let fij = obj.eval(&xij);
            let v = (fij - plus[i] - plus[j] + fx) / (h * h);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    (g, b)
}

/// Minimizer of `g's + ½ s'Bs` subject to `‖s‖ ≤ Δ`.
fn trust_region_step(g: &DVector<f64>, b: &DMatrix<f64>, radius: f64) -> DVector<f64> {
    let d = g.len();
    if !g.iter().chain(b.iter()).all(|v| v.is_finite()) {
        return DVector::zeros(d);
    }
    let eig = b.clone().symmetric_eigen();
    let lam = &eig.eigenvalues;
    let v = &eig.eigenvectors;
    let gt = v.transpose() * g;
    let lam_min = lam.min();
    let step_for = |mu: f64| -> DVector<f64> {
        let coeffs = DVector::from_fn(d, |i, _| {
            let den = lam[i] + mu;
            if den.abs() < 1e-300 {
                0.0
            } else {
                -gt[i] / den
            }
        });
        v * coeffs
    };
    if lam_min > 0.0 {
        let s = step_for(0.0);
        if s.norm() <= radius {
            return s;
        }
    }
    // Bisection on μ > max(0, −λ_min) for ‖s(μ)‖ = Δ.
    let floor = (-lam_min).max(0.0);
    let mut lo = floor + 1e-14 * (1.0 + floor);
    let mut hi = floor + g.norm() / radius + lam.amax() + 1.0;
    if step_for(lo).norm() < radius {
        // Hard case: pad along the lowest-curvature direction.
        let s = step_for(lo);
        let (imin, _) = lam.argmin();
        let dir = v.column(imin).into_owned();
        let sd = s.dot(&dir);
        let gap = radius * radius - s.norm_squared();
        let tau = -sd + (sd * sd + gap.max(0.0)).sqrt();
        return s + dir * tau;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if step_for(mid).norm() > radius {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + hi) {
            break;
        }
    }
    let s = step_for(hi);
    let n = s.norm();
    if n > radius {
        s * (radius / n)
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + x[0] * x[1];
        let m = minimize(f, &[5.0, 5.0], TrustRegionOptions::default());
        // stationary point of the quadratic: solve [2 1;1 6]x = [2;-12]
        let x1 = (2.0 * 6.0 + 12.0) / 11.0;
        let x2 = (-12.0 * 2.0 - 2.0) / 11.0;
        assert!((m.x[0] - x1).abs() < 1e-5, "{:?}", m.x);
        assert!((m.x[1] - x2).abs() < 1e-5);
        assert!(m.converged);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let m = minimize(
            f,
            &[-1.2, 1.0],
            TrustRegionOptions {
                max_evaluations: 20000,
                min_radius: 1e-9,
                ..Default::default()
            },
        );
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3, "{:?}", m);
    }

    #[test]
    fn nonsmooth_kink() {
        let f = |x: &[f64]| (x[0] - 0.3).abs() + 2.0 * (x[1] + 0.1).abs();
        let m = minimize(f, &[2.0, -3.0], TrustRegionOptions::default());
        assert!(m.value < 1e-4, "{m:?}");
    }

    #[test]
    fn zero_dimensional() {
        let m = minimize(|_| 7.0, &[], TrustRegionOptions::default());
        assert_eq!(m.value, 7.0);
        assert!(m.converged);
    }

    #[test]
    fn step_respects_radius() {
        let g = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let b = DMatrix::from_row_slice(3, 3, &[-1.0, 0.2, 0.0, 0.2, 2.0, 0.1, 0.0, 0.1, 0.5]);
        for r in [0.01, 0.5, 3.0] {
            let s = trust_region_step(&g, &b, r);
            assert!(s.norm() <= r * (1.0 + 1e-9));
            let q = |s: &DVector<f64>| g.dot(s) + 0.5 * s.dot(&(&b * s));
            assert!(q(&s) < 0.0);
        }
    }
}
