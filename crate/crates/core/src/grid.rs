//! Tensor grids over the unit cube.

/// Visits every point of `nodes^dim` in lexicographic order (last
/// coordinate fastest). `point` is reused between calls.
pub(crate) fn for_each_point(dim: usize, nodes: &[f64], mut visit: impl FnMut(&[f64])) {
    if dim == 0 {
        visit(&[]);
        return;
    }
    if nodes.is_empty() {
        return;
    }
    let mut idx = vec![0usize; dim];
    let mut point: Vec<f64> = vec![nodes[0]; dim];
    loop {
        visit(&point);
        let mut k = dim;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < nodes.len() {
                point[k] = nodes[idx[k]];
                break;
            }
            idx[k] = 0;
            point[k] = nodes[0];
        }
    }
}

/// Interior nodes `1/(g+1), ..., g/(g+1)`.
pub(crate) fn interior_nodes(g: usize) -> Vec<f64> {
    (1..=g).map(|k| k as f64 / (g + 1) as f64).collect()
}

/// Midpoint nodes `(k + 1/2)/g`, `k = 0..g`.
pub(crate) fn midpoint_nodes(g: usize) -> Vec<f64> {
    (0..g).map(|k| (k as f64 + 0.5) / g as f64).collect()
}
