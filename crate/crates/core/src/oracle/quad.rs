//! Adaptive Gauss-Kronrod (7/15) quadrature for complex integrands on an interval.

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// (Kronrod estimate, |Kronrod - Gauss|) on [a, b].
pub fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Recursive bisection until each piece meets its share of `tol` or `depth` runs out.
pub fn adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Quadrature {
    let (v, e) = gk15(f, a, b);
    if e <= tol || depth == 0 {
        return Quadrature { value: v, error: e, evaluations: 15 };
    }
    let m = 0.5 * (a + b);
    let l = adaptive(f, a, m, 0.5 * tol, depth - 1);
    let r = adaptive(f, m, b, 0.5 * tol, depth - 1);
    Quadrature { value: l.value + r.value, error: l.error + r.error, evaluations: 15 + l.evaluations + r.evaluations }
}

/// Adaptive quadrature over consecutive panels between sorted breakpoints.
pub fn adaptive_panels<F: Fn(f64) -> Complex64>(f: &F, breaks: &[f64], tol: f64, depth: u32) -> Quadrature {
    let share = tol / (breaks.len().max(2) - 1) as f64;
    let mut out = Quadrature { value: Complex64::new(0.0, 0.0), error: 0.0, evaluations: 0 };
    for w in breaks.windows(2) {
        let q = adaptive(f, w[0], w[1], share, depth);
        out.value += q.value;
        out.error += q.error;
        out.evaluations += q.evaluations;
    }
    out
}

/// (1/2pi) int e^{i t eta} / ((eta + i tau)^2 + omega^2) d eta by direct quadrature on
/// [-L, L] and asymptotic integration by parts for the two tails. Needs t != 0.
pub fn multiplier_by_quadrature(t: f64, tau: f64, omega: f64) -> Quadrature {
    assert!(t != 0.0, "oscillatory tails need t != 0");
    let i = Complex64::i();
    let a = i * (omega - tau);
    let b = -i * (omega + tau);
    let g = |eta: f64| 1.0 / ((eta + i * tau).powi(2) + omega * omega);
    let f = |eta: f64| (i * t * eta).exp() * g(eta);

    let at = t.abs();
    let big = (100.0f64).max(60.0 / at).max(20.0 * (omega + tau.abs()));
    let panel = (std::f64::consts::PI / at).min(big / 8.0);
    let n_side = (big / panel).ceil() as usize;
    let mut breaks: Vec<f64> = (0..=n_side).map(|j| -big + j as f64 * panel).filter(|&x| x < 0.0).collect();
    breaks.push(0.0);
    breaks.extend((1..=n_side).map(|j| (j as f64 * panel).min(big)));
    breaks.dedup();
    let body = adaptive_panels(&f, &breaks, 1e-13, 30);

    // n-th derivative of g = (1/(2 i omega)) (1/(eta - a) - 1/(eta - b))
    let dg = |eta: f64, n: i32| {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sign * fact * ((eta - a).powi(-n - 1) - (eta - b).powi(-n - 1)) / (2.0 * i * omega)
    };
    let it = i * t;
    let mut upper = Complex64::new(0.0, 0.0);
    let mut lower = Complex64::new(0.0, 0.0);
    for n in 0..10 {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        upper -= s * dg(big, n) / it.powi(n + 1);
        lower += s * dg(-big, n) / it.powi(n + 1);
    }
    let value = (body.value + (it * big).exp() * upper + (-it * big).exp() * lower) / (2.0 * std::f64::consts::PI);
    Quadrature { value, error: body.error / (2.0 * std::f64::consts::PI), evaluations: body.evaluations }
}
