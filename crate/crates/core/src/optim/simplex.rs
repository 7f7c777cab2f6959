use super::{inf_norm, Bounds, MinimizeOptions, MinimizeOutcome, Minimizer, Objective, Status};

/// Simplex iterations allowed per configured iteration.
const ITERATIONS_PER_UNIT: usize = 20;
const F_TOL: f64 = 1e-15;
const X_TOL: f64 = 1e-10;

/// Nelder-Mead with vertices clipped into the bounds and one restart from the
/// best vertex after the first collapse.
#[derive(Debug, Clone, Copy, Default)]
pub struct Simplex;

impl Minimizer for Simplex {
    fn name(&self) -> &'static str {
        "simplex"
    }

    fn minimize(
        &self,
        objective: &dyn Objective,
        x0: &[f64],
        bounds: &Bounds,
        options: &MinimizeOptions,
    ) -> MinimizeOutcome {
        let budget = options.max_iterations * ITERATIONS_PER_UNIT;
        let mut x = x0.to_vec();
        bounds.clip(&mut x);
        let mut evaluations = 0;
        let mut iterations = 0;
        let mut collapsed = false;
        for _ in 0..2 {
            let (best, it, ev, done) = nelder_mead(objective, &x, bounds, budget - iterations);
            x = best;
            iterations += it;
            evaluations += ev;
            collapsed = done;
            if !done || iterations >= budget {
                break;
            }
        }
        let (value, gradient) = objective.value_grad(&x);
        evaluations += 1;
        let status = if inf_norm(&bounds.projected_gradient(&x, &gradient))
            <= options.gradient_tolerance
        {
            Status::Converged
        } else if collapsed {
            Status::SimplexCollapsed
        } else {
            Status::MaxIterations
        };
        MinimizeOutcome {
            x,
            value,
            gradient,
            iterations,
            evaluations,
            status,
        }
    }
}

fn nelder_mead(
    objective: &dyn Objective,
    x0: &[f64],
    bounds: &Bounds,
    budget: usize,
) -> (Vec<f64>, usize, usize, bool) {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = objective.value(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for j in 0..n {
        let mut p = x0.to_vec();
        let step = 0.1 * x0[j].abs().max(1.0);
        p[j] += if p[j] + step > bounds.upper[j] { -step } else { step };
        bounds.clip(&mut p);
        pts.push(p);
    }
    let mut fs: Vec<f64> = pts.iter().map(|p| eval(p)).collect();

    let mut iterations = 0;
    let mut collapsed = false;
    while iterations < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        fs = order.iter().map(|&i| fs[i]).collect();

        let f_spread = (fs[n] - fs[0]).abs();
        let x_spread = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
            .fold(0.0, f64::max);
        let scale = 1.0 + inf_norm(&pts[0]);
        if f_spread <= F_TOL * (1.0 + fs[0].abs()) && x_spread <= X_TOL * scale {
            collapsed = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&pts[n])
                .map(|(c, w)| c + t * (c - w))
                .collect();
            bounds.clip(&mut p);
            p
        };

        let xr = along(1.0);
        let fr = eval(&xr);
        if fr < fs[0] {
            let xe = along(2.0);
            let fe = eval(&xe);
            if fe < fr {
                pts[n] = xe;
                fs[n] = fe;
            } else {
                pts[n] = xr;
                fs[n] = fr;
            }
            continue;
        }
        if fr < fs[n - 1] {
            pts[n] = xr;
            fs[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < fs[n] {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fs[n].min(fr) {
            pts[n] = xc;
            fs[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..=n {
            let p: Vec<f64> = pts[i]
                .iter()
                .zip(&pts[0])
                .map(|(a, b)| b + 0.5 * (a - b))
                .collect();
            fs[i] = eval(&p);
            pts[i] = p;
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| fs[a].total_cmp(&fs[b]))
        .expect("nonempty simplex");
    (pts[best].clone(), iterations, evaluations, collapsed)
}
