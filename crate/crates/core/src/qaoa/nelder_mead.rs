//! Derivative-free simplex minimizer (Nelder-Mead).
//!
//! Standard coefficients: reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5. The initial simplex is the start point plus one step along
//! each axis. Iteration stops when the simplex value spread falls below the
//! tolerance or the iteration cap is reached.

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    pub initial_step: f64,
    pub ftol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_iters: 200, initial_step: 0.1, ftol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iters: usize,
    pub converged: bool,
    /// Best objective value after each iteration (index 0 = initial simplex).
    pub history: Vec<f64>,
}

pub fn minimize<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert!(dim > 0, "objective must have at least one parameter");

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut history = Vec::with_capacity(opts.max_iters + 1);
    let mut iters = 0;
    let mut converged = false;

    loop {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| {
            values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        if history.is_empty() {
            history.push(values[0]);
        }
        let spread = values[dim] - values[0];
        if spread.abs() <= opts.ftol * (1.0 + values[0].abs()) {
            converged = true;
            break;
        }
        if iters >= opts.max_iters {
            break;
        }
        iters += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|d| simplex[..dim].iter().map(|v| v[d]).sum::<f64>() / dim as f64)
            .collect();
        let worst = values[dim];
        let best = values[0];
        let second_worst = values[dim - 1];

        let reflect: Vec<f64> =
            centroid.iter().zip(&simplex[dim]).map(|(c, w)| c + (c - w)).collect();
        let f_reflect = f(&reflect);

        if f_reflect < best {
            let expand: Vec<f64> =
                centroid.iter().zip(&simplex[dim]).map(|(c, w)| c + 2.0 * (c - w)).collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[dim] = expand;
                values[dim] = f_expand;
            } else {
                simplex[dim] = reflect;
                values[dim] = f_reflect;
            }
        } else if f_reflect < second_worst {
            simplex[dim] = reflect;
            values[dim] = f_reflect;
        } else {
            let (contract, f_contract) = if f_reflect < worst {
                let outside: Vec<f64> =
                    centroid.iter().zip(&reflect).map(|(c, r)| c + 0.5 * (r - c)).collect();
                let fo = f(&outside);
                (outside, fo)
            } else {
                let inside: Vec<f64> =
                    centroid.iter().zip(&simplex[dim]).map(|(c, w)| c + 0.5 * (w - c)).collect();
                let fi = f(&inside);
                (inside, fi)
            };
            if f_contract < worst.min(f_reflect) {
                simplex[dim] = contract;
                values[dim] = f_contract;
            } else {
                // Shrink toward the best vertex.
                let best_point = simplex[0].clone();
                for v in simplex[1..].iter_mut() {
                    for (x, b) in v.iter_mut().zip(&best_point) {
                        *x = b + 0.5 * (*x - b);
                    }
                }
                for (i, v) in simplex.iter().enumerate().skip(1) {
                    values[i] = f(v);
                }
            }
        }

        let iter_best = values.iter().cloned().fold(f64::INFINITY, f64::min);
        history.push(iter_best.min(*history.last().unwrap()));
    }

    let mut best_idx = 0;
    for i in 1..=dim {
        if values[i] < values[best_idx] {
            best_idx = i;
        }
    }
    NelderMeadOutcome {
        x: simplex[best_idx].clone(),
        fx: values[best_idx],
        iters,
        converged,
        history,
    }
}
