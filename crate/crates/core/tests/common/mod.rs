//! Brute-force oracles over all `2^T` sign sequences of the symmetric walk.
#![allow(dead_code)]

/// Partial sums `S_0 = 0, …, S_T` of every sign sequence.
pub fn walks(t: usize) -> impl Iterator<Item = Vec<i64>> {
    (0u64..1 << t).map(move |bits| {
        let mut s = vec![0i64; t + 1];
        for j in 0..t {
            s[j + 1] = s[j] + if bits >> j & 1 == 1 { 1 } else { -1 };
        }
        s
    })
}

fn probability(t: usize, event: impl Fn(&[i64]) -> bool) -> f64 {
    let hits = walks(t).filter(|s| event(s)).count();
    hits as f64 / (1u64 << t) as f64
}

/// `P(S_T / T ∈ (β − ε, β + ε))`.
pub fn local(t: usize, beta: f64, eps: f64) -> f64 {
    probability(t, |s| {
        let z = s[t] as f64 / t as f64;
        (z - beta).abs() < eps
    })
}

/// Blocks end at the step counts in `cuts` (last one `T`); each block's
/// slope must be within `eps` of its target.
pub fn fdd(t: usize, cuts: &[usize], betas: &[f64], eps: f64) -> f64 {
    probability(t, |s| {
        let mut prev = 0;
        cuts.iter().zip(betas).all(|(&c, &b)| {
            let z = (s[c] - s[prev]) as f64 / (c - prev) as f64;
            prev = c;
            (z - b).abs() < eps
        })
    })
}

/// `P(sup_s |S_{⌊sT⌋}/T − a·s| < ε)`. On `[j/T, (j+1)/T)` the gap is
/// extremal at the ends, the right end taken as a left limit.
pub fn tube(t: usize, slope: f64, eps: f64) -> f64 {
    let tf = t as f64;
    probability(t, |s| {
        (0..=t).all(|j| {
            let z = s[j] as f64 / tf;
            let here = (z - slope * (j as f64 / tf)).abs() < eps;
            let before_next = j == t || (z - slope * ((j + 1) as f64 / tf)).abs() < eps;
            here && before_next
        })
    })
}

/// Binary entropy form of the symmetric walk's rate function.
pub fn rademacher_rate(alpha: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { x * (2.0 * x).ln() } else { 0.0 };
    term((1.0 + alpha) / 2.0) + term((1.0 - alpha) / 2.0)
}

/// `ln P(S_T / T ∈ (β − ε, β + ε))` from binomial coefficients, for
/// horizons too long to enumerate.
pub fn log_local_binomial(t: usize, beta: f64, eps: f64) -> f64 {
    let tf = t as f64;
    let ln_choose = |k: usize| ln_factorial(t) - ln_factorial(k) - ln_factorial(t - k);
    let terms: Vec<f64> = (0..=t)
        .filter(|&k| ((2 * k) as f64 - tf) / tf > beta - eps && ((2 * k) as f64 - tf) / tf < beta + eps)
        .map(|k| ln_choose(k) - tf * std::f64::consts::LN_2)
        .collect();
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}
