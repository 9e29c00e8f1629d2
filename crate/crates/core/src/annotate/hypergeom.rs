//! Hypergeometric upper tail and Holm-Bonferroni adjustment.

/// Largest integer below which every `f64` integer is exact.
const EXACT_LIMIT: u128 = 1 << 53;

/// `C(n, k)` in `u128`, `None` on overflow.
fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) is divisible by (i + 1) at every step
        c = c.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(c)
}

/// `P(X >= k)` for `X ~ Hypergeometric(population, successes, draws)`.
///
/// When `C(population, draws)` fits exactly in an `f64` the tail is the
/// ratio of two exact integer counts; otherwise terms are accumulated from
/// a table of log-factorials.
pub struct UpperTail {
    population: u64,
    ln_fact: Vec<f64>,
}

impl UpperTail {
    pub fn new(population: u64) -> Self {
        let mut ln_fact = Vec::with_capacity(population as usize + 1);
        let mut acc = 0.0f64;
        ln_fact.push(0.0);
        for i in 1..=population {
            acc += (i as f64).ln();
            ln_fact.push(acc);
        }
        Self { population, ln_fact }
    }

    fn ln_binomial(&self, n: u64, k: u64) -> f64 {
        self.ln_fact[n as usize] - self.ln_fact[k as usize] - self.ln_fact[(n - k) as usize]
    }

    pub fn p_value(&self, successes: u64, draws: u64, observed: u64) -> f64 {
        let n = self.population;
        assert!(successes <= n && draws <= n, "sample larger than population");
        let hi = successes.min(draws);
        let lo = draws.saturating_sub(n - successes);
        if observed <= lo {
            return 1.0;
        }
        if observed > hi {
            return 0.0;
        }
        if let Some(total) = binomial_u128(n, draws).filter(|&t| t < EXACT_LIMIT) {
            let hits: u128 = (observed..=hi)
                .map(|x| {
                    binomial_u128(successes, x).expect("bounded by total")
                        * binomial_u128(n - successes, draws - x).expect("bounded by total")
                })
                .sum();
            return hits as f64 / total as f64;
        }
        let ln_total = self.ln_binomial(n, draws);
        let p: f64 = (observed..=hi)
            .map(|x| {
                (self.ln_binomial(successes, x) + self.ln_binomial(n - successes, draws - x) - ln_total)
                    .exp()
            })
            .sum();
        p.min(1.0)
    }
}

/// Holm step-down adjusted p-values, returned in input order.
pub fn holm_bonferroni(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p[i]).min(1.0));
        adjusted[i] = running;
    }
    adjusted
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial_u128(20, 5), Some(15504));
        assert_eq!(binomial_u128(5, 7), Some(0));
        assert_eq!(binomial_u128(60, 30), Some(118_264_581_564_861_424));
        assert_eq!(binomial_u128(1000, 500), None);
    }

    #[test]
    fn twenty_choose_five() {
        assert_eq!(UpperTail::new(20).p_value(5, 5, 5), 1.0 / 15504.0);
    }

    #[test]
    fn log_path_agrees_with_exact_path() {
        // C(60, 12) < 2^53 takes the exact path; compare with the log path.
        let t = UpperTail::new(60);
        for k in 0..=12 {
            let exact = t.p_value(20, 12, k);
            let ln_total = t.ln_binomial(60, 12);
            let logp: f64 = (k..=12)
                .map(|x| (t.ln_binomial(20, x) + t.ln_binomial(40, 12 - x) - ln_total).exp())
                .sum::<f64>()
                .min(1.0);
            assert!((exact - logp).abs() <= 1e-12 * exact.max(1e-300), "k={k}: {exact} vs {logp}");
        }
    }

    #[test]
    fn holm_examples() {
        let adj = holm_bonferroni(&[0.01, 0.04, 0.03, 0.005]);
        // sorted: 0.005*4=0.02, 0.01*3=0.03, 0.03*2=0.06, 0.04*1 -> max 0.06
        assert_eq!(adj, vec![0.03, 0.06, 0.06, 0.02]);
        assert!(holm_bonferroni(&[]).is_empty());
        assert_eq!(holm_bonferroni(&[0.9, 0.8]), vec![1.0, 1.0]);
    }
}
