use nalgebra::{DMatrix, DVector};

use super::{inf_norm, Bounds, MinimizeOptions, MinimizeOutcome, Minimizer, Objective, Status};

/// Largest coordinate move allowed in a single line-search trial.
const MAX_STEP: f64 = 5.0;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Projected BFGS with a backtracking Armijo line search. Trial points are
/// clipped into the bounds.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuasiNewton;

impl Minimizer for QuasiNewton {
    fn name(&self) -> &'static str {
        "quasi-newton"
    }

    fn minimize(
        &self,
        objective: &dyn Objective,
        x0: &[f64],
        bounds: &Bounds,
        options: &MinimizeOptions,
    ) -> MinimizeOutcome {
        let n = x0.len();
        let mut x = x0.to_vec();
        bounds.clip(&mut x);
        let (mut f, mut g) = objective.value_grad(&x);
        let mut evaluations = 1;
        let mut h = DMatrix::<f64>::identity(n, n);
        let mut fresh = true;
        let mut status = Status::MaxIterations;
        let mut iterations = 0;

        while iterations < options.max_iterations {
            let pg = bounds.projected_gradient(&x, &g);
            if inf_norm(&pg) <= options.gradient_tolerance {
                status = Status::Converged;
                break;
            }
            iterations += 1;

            let active: Vec<bool> = (0..n).map(|j| pg[j] == 0.0 && g[j] != 0.0).collect();
            let mut d = direction(&h, &g, &active);
            if dot(&g, &d) >= 0.0 || d.iter().any(|v| !v.is_finite()) {
                h = DMatrix::identity(n, n);
                fresh = true;
                d = pg.iter().map(|v| -v).collect();
            }

            match line_search(objective, bounds, &x, f, &g, &d, &mut evaluations) {
                Some((xn, fnew, gn)) => {
                    let s = DVector::from_iterator(n, xn.iter().zip(&x).map(|(a, b)| a - b));
                    let y = DVector::from_iterator(n, gn.iter().zip(&g).map(|(a, b)| a - b));
                    let sy = s.dot(&y);
                    if sy > 1e-12 * s.norm() * y.norm() && sy > 0.0 {
                        if fresh {
                            h *= sy / y.dot(&y);
                            fresh = false;
                        }
                        let rho = 1.0 / sy;
                        let hy = &h * &y;
                        let yhy = y.dot(&hy);
                        // H+ = H - rho (s (Hy)' + (Hy) s') + (rho^2 y'Hy + rho) s s'
                        h -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
                        h += (&s * s.transpose()) * (rho * rho * yhy + rho);
                    }
                    x = xn;
                    f = fnew;
                    g = gn;
                }
                None if !fresh => {
                    // retry from steepest descent before giving up
                    h = DMatrix::identity(n, n);
                    fresh = true;
                }
                None => {
                    status = Status::LineSearchFailed;
                    break;
                }
            }
        }

        if status == Status::MaxIterations
            && inf_norm(&bounds.projected_gradient(&x, &g)) <= options.gradient_tolerance
        {
            status = Status::Converged;
        }

        MinimizeOutcome {
            x,
            value: f,
            gradient: g,
            iterations,
            evaluations,
            status,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn direction(h: &DMatrix<f64>, g: &[f64], active: &[bool]) -> Vec<f64> {
    let n = g.len();
    let gv = DVector::from_iterator(
        n,
        g.iter().zip(active).map(|(&v, &a)| if a { 0.0 } else { v }),
    );
    let mut d: Vec<f64> = (-(h * gv)).iter().copied().collect();
    for (dj, &a) in d.iter_mut().zip(active) {
        if a {
            *dj = 0.0;
        }
    }
    d
}

type Trial = (Vec<f64>, f64, Vec<f64>);

fn line_search(
    objective: &dyn Objective,
    bounds: &Bounds,
    x: &[f64],
    f: f64,
    g: &[f64],
    d: &[f64],
    evaluations: &mut usize,
) -> Option<Trial> {
    let dmax = inf_norm(d);
    if dmax == 0.0 || !dmax.is_finite() {
        return None;
    }
    let mut alpha = (MAX_STEP / dmax).min(1.0);
    for _ in 0..MAX_BACKTRACKS {
        let mut xn: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
        bounds.clip(&mut xn);
        if xn == x {
            return None;
        }
        let step: Vec<f64> = xn.iter().zip(x).map(|(a, b)| a - b).collect();
        let decrease = dot(g, &step);
        let (fnew, gn) = objective.value_grad(&xn);
        *evaluations += 1;
        if fnew.is_finite() && fnew <= f + ARMIJO_C1 * decrease && decrease < 0.0 {
            return Some((xn, fnew, gn));
        }
        // safeguarded quadratic interpolation on phi(alpha)
        let denom = 2.0 * (fnew - f - decrease);
        let next = if fnew.is_finite() && denom > 0.0 {
            (-decrease * alpha / denom).clamp(0.1 * alpha, 0.5 * alpha)
        } else {
            0.5 * alpha
        };
        alpha = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::test_functions::{Bowl, Rosenbrock};

    fn opts() -> MinimizeOptions {
        MinimizeOptions {
            max_iterations: 500,
            gradient_tolerance: 1e-9,
        }
    }

    #[test]
    fn solves_rosenbrock() {
        let out = QuasiNewton.minimize(&Rosenbrock, &[-1.2, 1.0], &Bounds::unbounded(2), &opts());
        assert_eq!(out.status, Status::Converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn respects_bounds() {
        let bowl = Bowl(vec![3.0, -2.0, 0.5]);
        let bounds = Bounds::unbounded(3).with(0, -1.0, 1.0);
        let out = QuasiNewton.minimize(&bowl, &[0.0, 0.0, 0.0], &bounds, &opts());
        assert_eq!(out.status, Status::Converged);
        assert_eq!(out.x[0], 1.0);
        assert!((out.x[1] + 2.0).abs() < 1e-8);
        assert!((out.x[2] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn never_loses_ground() {
        let x0 = [0.3, 2.5];
        let f0 = Rosenbrock.value(&x0);
        let short = MinimizeOptions {
            max_iterations: 3,
            gradient_tolerance: 1e-12,
        };
        let out = QuasiNewton.minimize(&Rosenbrock, &x0, &Bounds::unbounded(2), &short);
        assert!(out.value <= f0);
        assert_eq!(out.status, Status::MaxIterations);
    }
}
