//! Euclidean projection onto the probability simplex.

/// Projects `v` onto `{x : x >= 0, sum x = 1}` in place.
///
/// Sort-based exact algorithm: find the largest `rho` with
/// `u_rho > (sum_{i<=rho} u_i - 1) / rho` over the decreasing sort `u`, then
/// shift by the corresponding threshold and clip at zero.
pub fn project_onto_simplex(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let mut u = v.to_vec();
    // stable, so equal entries keep index order
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if ui > t {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}
