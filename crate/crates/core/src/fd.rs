//! Finite-difference weights (Fornberg's recursion) and nodal derivatives on
//! uniformly spaced samples.

/// Weights `c[j]` such that `f^(m)(x0) ≈ Σ_j c[j] f(xs[j])`.
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    assert!(n > m, "need more than {m} points for derivative order {m}");
    // c[j][k]: weight of point j for derivative k
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Half-width of the centred stencil giving fourth-order accuracy for the
/// `m`-th derivative.
pub fn stencil_radius(m: usize) -> usize {
    m.div_ceil(2) + 1
}

/// `m`-th derivative of uniformly spaced samples (spacing `dx`) at every
/// sample, fourth-order accurate; windows are shifted inward at the ends.
pub fn nodal_derivative(values: &[f64], dx: f64, m: usize) -> Vec<f64> {
    if m == 0 {
        return values.to_vec();
    }
    let n = values.len();
    let r = stencil_radius(m);
    let centred = 2 * r + 1;
    // off-centre windows need m + 4 points to stay fourth order
    let edge = (m + 4).max(centred).min(n);
    assert!(edge > m, "too few samples for derivative order {m}");
    let weights = |offset: usize, width: usize| -> Vec<f64> {
        let xs: Vec<f64> = (0..width).map(|j| j as f64).collect();
        let scale = dx.powi(m as i32);
        fornberg_weights(offset as f64, &xs, m)
            .into_iter()
            .map(|c| c / scale)
            .collect()
    };
    let interior = weights(r, centred.min(n));
    let mut cache: Vec<Option<Vec<f64>>> = vec![None; 2 * edge];
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let (start, w) = if i >= r && i + r < n && centred <= n {
            (i - r, &interior)
        } else if i < r {
            (0, &*cache[i].get_or_insert_with(|| weights(i, edge)))
        } else {
            let start = n - edge;
            let offset = i - start;
            (
                start,
                &*cache[edge + offset].get_or_insert_with(|| weights(offset, edge)),
            )
        };
        *o = w.iter().zip(&values[start..]).map(|(c, v)| c * v).sum();
    }
    out
}

/// Fourth-order Richardson-extrapolated central difference of `f` at `x`,
/// used as a test oracle for analytic derivatives.
pub fn richardson_derivative<F: Fn(f64) -> f64>(f: F, x: f64, step: f64) -> f64 {
    let d = |s: f64| (f(x + s) - f(x - s)) / (2.0 * s);
    (4.0 * d(step / 2.0) - d(step)) / 3.0
}
