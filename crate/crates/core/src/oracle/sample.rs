use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DiscreteCbn;
use crate::error::Result;
use crate::formula::JointTable;

fn draw(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn forward(m: &DiscreteCbn, n: usize, seed: u64, mut each: impl FnMut(&[usize])) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = m.graph().topological_indices();
    let mut u = vec![0usize; m.exogenous().len()];
    let mut v = vec![0usize; m.graph().n()];
    for _ in 0..n {
        for (k, e) in m.exogenous().iter().enumerate() {
            u[k] = draw(&mut rng, &e.probs);
        }
        for &i in &order {
            v[i] = draw(&mut rng, m.row(i, &v, &u));
        }
        each(&v);
    }
}

/// `n` forward samples; each sample lists values in variable name order.
pub fn sample_dataset(m: &DiscreteCbn, n: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n);
    forward(m, n, seed, |v| out.push(v.to_vec()));
    out
}

/// Empirical joint of `n` forward samples, without keeping the samples.
/// Same draws as [`sample_dataset`] with the same seed.
pub fn sample_table(m: &DiscreteCbn, n: usize, seed: u64, pseudo: f64) -> Result<JointTable> {
    let cards = m.cards().to_vec();
    let size: usize = cards.iter().product();
    let mut counts = vec![pseudo / size as f64; size];
    forward(m, n, seed, |v| {
        let i = v.iter().zip(&cards).fold(0, |acc, (&x, &c)| acc * c + x);
        counts[i] += 1.0;
    });
    JointTable::normalized(m.graph().names().to_vec(), cards, counts)
}

/// Empirical distribution of `samples`, with `pseudo` total extra
/// observations spread evenly over all cells.
pub fn empirical_table(
    variables: Vec<String>,
    cards: Vec<usize>,
    samples: &[Vec<usize>],
    pseudo: f64,
) -> Result<JointTable> {
    let size: usize = cards.iter().product();
    let mut counts = vec![pseudo / size as f64; size];
    for s in samples {
        let i = s.iter().zip(&cards).fold(0, |acc, (&v, &c)| acc * c + v);
        counts[i] += 1.0;
    }
    JointTable::normalized(variables, cards, counts)
}
