//! Derivative-free simplex minimizer with restarts.
//!
//! Plain Nelder-Mead (reflection 1, expansion 2, contraction 0.5, shrink
//! 0.5) wrapped in a restart loop: after each inner run the simplex is
//! rebuilt around the incumbent best with a smaller spread. The driver calls
//! the search converged once two consecutive runs finish with the simplex's
//! objective spread below tolerance.

/// Objective values at or above this are treated as "invalid point".
pub const PENALTY: f64 = 1e300;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Iteration cap for one inner Nelder-Mead run.
    pub max_iters: usize,
    /// Objective-spread tolerance that ends an inner run.
    pub spread_tol: f64,
    /// Number of restart rounds (inner runs) allowed.
    pub max_restarts: usize,
    /// Per-coordinate scale of the first simplex.
    pub init_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            spread_tol: 1e-8,
            max_restarts: 10,
            init_step: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    /// Total function evaluations across all restarts.
    pub evals: usize,
    pub converged: bool,
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn around(x0: &[f64], step: f64, f: &mut dyn FnMut(&[f64]) -> f64, evals: &mut usize) -> Self {
        let dim = x0.len();
        let mut points = Vec::with_capacity(dim + 1);
        points.push(x0.to_vec());
        for i in 0..dim {
            let mut p = x0.to_vec();
            let s = if p[i].abs() > 1.0 { step * p[i].abs() } else { step };
            p[i] += s;
            points.push(p);
        }
        let values = points
            .iter()
            .map(|p| {
                *evals += 1;
                f(p)
            })
            .collect();
        Simplex { points, values }
    }

    fn order(&mut self) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = idx.iter().map(|&i| self.points[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn spread(&self) -> f64 {
        let worst = self.values.last().copied().unwrap_or(f64::INFINITY);
        let best = self.values.first().copied().unwrap_or(f64::INFINITY);
        if !worst.is_finite() || !best.is_finite() {
            f64::INFINITY
        } else {
            worst - best
        }
    }
}

fn run_once(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    opts: &SimplexOptions,
    evals: &mut usize,
) -> (Vec<f64>, f64, f64) {
    let dim = x0.len();
    let mut s = Simplex::around(x0, step, f, evals);
    s.order();

    for _ in 0..opts.max_iters {
        if s.spread() < opts.spread_tol {
            break;
        }
        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for p in &s.points[..dim] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v;
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let worst = s.points[dim].clone();
        let f_best = s.values[0];
        let f_second = s.values[dim - 1];
        let f_worst = s.values[dim];

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst)
            .map(|(c, w)| c + (c - w))
            .collect();
        *evals += 1;
        let f_reflect = f(&reflect);

        if f_reflect < f_best {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            *evals += 1;
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                s.points[dim] = expand;
                s.values[dim] = f_expand;
            } else {
                s.points[dim] = reflect;
                s.values[dim] = f_reflect;
            }
        } else if f_reflect < f_second {
            s.points[dim] = reflect;
            s.values[dim] = f_reflect;
        } else {
            // Contract toward the better of worst/reflected.
            let (base, f_base) = if f_reflect < f_worst {
                (&reflect, f_reflect)
            } else {
                (&worst, f_worst)
            };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(base)
                .map(|(c, b)| c + 0.5 * (b - c))
                .collect();
            *evals += 1;
            let f_contract = f(&contract);
            if f_contract < f_base {
                s.points[dim] = contract;
                s.values[dim] = f_contract;
            } else {
                // Shrink toward the best vertex.
                let best = s.points[0].clone();
                for i in 1..=dim {
                    for (p, b) in s.points[i].iter_mut().zip(&best) {
                        *p = b + 0.5 * (*p - b);
                    }
                    *evals += 1;
                    s.values[i] = f(&s.points[i]);
                }
            }
        }
        s.order();
    }
    (s.points[0].clone(), s.values[0], s.spread())
}

/// Minimizes `f` from `x0` with restarts; convergence means two consecutive
/// inner runs ended with spread below `opts.spread_tol`.
pub fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &SimplexOptions,
) -> SimplexOutcome {
    let mut evals = 0usize;
    let mut x = x0.to_vec();
    let mut fx = f64::INFINITY;
    let mut tight_runs = 0usize;
    let mut converged = false;

    for round in 0..opts.max_restarts {
        let step = if round == 0 {
            opts.init_step
        } else {
            (opts.init_step * 0.5f64.powi(round as i32)).max(0.02)
        };
        let (bx, bfx, spread) = run_once(&mut f, &x, step, opts, &mut evals);
        if bfx <= fx {
            x = bx;
            fx = bfx;
        }
        if spread < opts.spread_tol {
            tight_runs += 1;
            if tight_runs >= 2 {
                converged = true;
                break;
            }
        } else {
            tight_runs = 0;
        }
    }

    SimplexOutcome {
        x,
        fx,
        evals,
        converged,
    }
}
