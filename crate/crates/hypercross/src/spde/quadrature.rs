//! Gauss–Legendre rules and orthonormal Legendre polynomials.

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of the `n`-point rule on `[−1, 1]`, weights summing to 1 (measure `dy/2`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `φ_0(y), ..., φ_max(y)` with `φ_n = sqrt(2n+1)·P_n`, orthonormal for `dy/2`.
pub fn orthonormal_legendre(max: usize, y: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(max + 1);
    p.push(1.0);
    if max >= 1 {
        p.push(y);
    }
    for k in 2..=max {
        let kf = k as f64;
        p.push(((2.0 * kf - 1.0) * y * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf);
    }
    p.iter().enumerate().map(|(n, v)| v * (2.0 * n as f64 + 1.0).sqrt()).collect()
}
