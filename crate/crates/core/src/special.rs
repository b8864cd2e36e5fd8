//! Power-law series via Euler–Maclaurin summation.

const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Smallest start point for the asymptotic expansion.
const EM_START: u64 = 24;

/// Σ_{x ≥ m} x^{-s} (c·ln x + e) for m ≥ EM_START, s > 1.
fn em_tail(m: u64, s: f64, c: f64, e: f64) -> f64 {
    let mf = m as f64;
    let ln = mf.ln();
    let sm1 = s - 1.0;
    let m1s = mf.powf(1.0 - s);
    let integral = m1s * (c * (ln / sm1 + 1.0 / (sm1 * sm1)) + e / sm1);
    let g0 = mf.powf(-s) * (c * ln + e);
    // D^j g = x^{a-j}(c_j ln x + e_j), a = -s.
    let a = -s;
    let (mut cj, mut ej) = (c, e);
    let mut corr = 0.0;
    let mut fact = 1.0;
    for j in 0..(2 * BERNOULLI.len()) {
        let aj = a - j as f64;
        let (nc, ne) = (aj * cj, aj * ej + cj);
        cj = nc;
        ej = ne;
        let order = j + 1;
        fact *= order as f64;
        if order % 2 == 1 {
            let b = BERNOULLI[order / 2];
            let deriv = mf.powf(a - order as f64) * (cj * ln + ej);
            corr += b / (fact * (order + 1) as f64) * deriv;
        }
    }
    integral + g0 / 2.0 - corr
}

fn direct_then_tail(a: u64, s: f64, c: f64, e: f64) -> f64 {
    let start = a.max(1);
    let m = start.max(EM_START);
    let mut head = 0.0;
    // Sum smallest terms first.
    for x in (start..m).rev() {
        let xf = x as f64;
        head += xf.powf(-s) * (c * xf.ln() + e);
    }
    em_tail(m, s, c, e) + head
}

/// Hurwitz zeta at integer offsets: Σ_{x ≥ a} x^{-s}, a ≥ 1, s > 1.
pub fn hurwitz_zeta(s: f64, a: u64) -> f64 {
    assert!(s > 1.0, "series diverges for s <= 1");
    direct_then_tail(a, s, 0.0, 1.0)
}

/// Σ_{x ≥ a} x^{-s} ln x, a ≥ 1, s > 1.
pub fn log_power_sum(s: f64, a: u64) -> f64 {
    assert!(s > 1.0, "series diverges for s <= 1");
    direct_then_tail(a, s, 1.0, 0.0)
}

/// Σ_{x ≥ a} x b^x for 0 < b < 1.
pub fn geometric_first_moment(b: f64, a: u64) -> f64 {
    let af = a as f64;
    b.powf(af) * (af * (1.0 - b) + b) / ((1.0 - b) * (1.0 - b))
}

pub fn powi_u(b: f64, x: u64) -> f64 {
    if x <= i32::MAX as u64 {
        b.powi(x as i32)
    } else {
        b.powf(x as f64)
    }
}

/// −p log₂ p with the 0 log 0 = 0 convention.
pub fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Smallest integer x in [lo, ∞) with pred(x) true, for monotone pred.
pub fn search_first(lo: u64, mut pred: impl FnMut(u64) -> bool) -> u64 {
    if pred(lo) {
        return lo;
    }
    let mut bad = lo;
    let mut step = 1u64;
    let mut good = loop {
        let cand = bad.saturating_add(step);
        if pred(cand) {
            break cand;
        }
        if cand == u64::MAX {
            return u64::MAX;
        }
        bad = cand;
        step = step.saturating_mul(2);
    };
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if pred(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}
