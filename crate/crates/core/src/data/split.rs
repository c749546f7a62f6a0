//! Biased client splits: partitions a dataset into per-client subsets with
//! overrepresented segments plus a public hold-out matching the overall
//! distribution.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::dataset::{Dataset, Value};
use crate::data::schema::FeatureKind;
use crate::error::{Error, Result};

/// Row condition a predicate matches on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateSet {
    /// Categorical membership, e.g. pay in {"1", "3"}.
    Values(Vec<String>),
    /// Inclusive numeric interval for continuous features.
    Range { min: f64, max: f64 },
}

/// Overrepresentation target for one client: its subset should contain
/// `fraction` matching rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPredicate {
    pub feature: String,
    pub matching: PredicateSet,
    pub fraction: f64,
}

impl SplitPredicate {
    fn matches(&self, value: &Value) -> bool {
        match (&self.matching, value) {
            (PredicateSet::Values(set), Value::Cat(s)) => set.iter().any(|v| v == s),
            (PredicateSet::Range { min, max }, Value::Float(x)) => *min <= *x && *x <= *max,
            _ => false,
        }
    }
}

/// Result of a biased split: one dataset per client plus the public
/// hold-out.
#[derive(Debug, Clone)]
pub struct BiasedSplit {
    pub clients: Vec<Dataset>,
    pub public: Dataset,
}

/// Splits `d` into `n_clients` client datasets and a public hold-out.
///
/// Half of the rows (randomly chosen, hence distribution-matching) become
/// the public set. The rest is partitioned evenly across clients; client
/// `i` is then resampled (with replacement when needed) so that the
/// fraction of rows matching predicate `i` hits its target within one row.
/// Clients beyond the predicate list keep their partition unchanged.
/// Deterministic given the seed; schemas are preserved.
pub fn biased_split(
    d: &Dataset,
    predicates: &[SplitPredicate],
    n_clients: usize,
    seed: u64,
) -> Result<BiasedSplit> {
    if n_clients == 0 {
        return Err(Error::Config("biased_split: need at least one client".into()));
    }
    if predicates.len() > n_clients {
        return Err(Error::Config(format!(
            "biased_split: {} predicates for {} clients",
            predicates.len(),
            n_clients
        )));
    }
    for p in predicates {
        if !(0.0 < p.fraction && p.fraction < 1.0) {
            return Err(Error::Config(format!(
                "biased_split: fraction {} for '{}' must be in (0,1)",
                p.fraction, p.feature
            )));
        }
        let idx = d
            .schema
            .feature_index(&p.feature)
            .ok_or_else(|| Error::Config(format!("biased_split: unknown feature '{}'", p.feature)))?;
        match (&p.matching, &d.schema.feature(idx).kind) {
            (PredicateSet::Values(_), FeatureKind::Categorical(_)) => {}
            (PredicateSet::Range { .. }, FeatureKind::Continuous) => {}
            _ => {
                return Err(Error::Config(format!(
                    "biased_split: predicate on '{}' does not match the feature kind",
                    p.feature
                )));
            }
        }
        let any = d
            .rows()
            .iter()
            .any(|row| p.matches(&row[idx]));
        if !any {
            return Err(Error::Config(format!(
                "biased_split: predicate on '{}' matches zero rows",
                p.feature
            )));
        }
    }

    let m = d.n_rows();
    let pool_size = m / 2;
    if pool_size < n_clients {
        return Err(Error::Config(format!(
            "biased_split: {m} rows is too few for {n_clients} clients"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let (pool, public_rows) = order.split_at(pool_size);

    let mut clients = Vec::with_capacity(n_clients);
    let chunk = pool_size / n_clients;
    let remainder = pool_size % n_clients;
    let mut at = 0;
    for c in 0..n_clients {
        let size = chunk + usize::from(c < remainder);
        let slice = &pool[at..at + size];
        at += size;
        let name = format!("{}_client{c}", d.name);
        let indices = match predicates.get(c) {
            Some(p) => resample_to_fraction(d, slice, p, &mut rng)?,
            None => slice.to_vec(),
        };
        clients.push(d.select_rows(&indices, name)?);
    }
    let public = d.select_rows(public_rows, format!("{}_public", d.name))?;
    Ok(BiasedSplit { clients, public })
}

/// Resamples `slice` (keeping its length) so that `round(fraction * len)`
/// rows match the predicate.
fn resample_to_fraction(
    d: &Dataset,
    slice: &[usize],
    p: &SplitPredicate,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let feature_idx = d.schema.feature_index(&p.feature).unwrap();
    let (matching, rest): (Vec<usize>, Vec<usize>) = slice
        .iter()
        .copied()
        .partition(|&i| p.matches(&d.row(i)[feature_idx]));
    let size = slice.len();
    let want = ((p.fraction * size as f64).round() as usize).clamp(1, size.saturating_sub(1));
    if matching.is_empty() {
        return Err(Error::Config(format!(
            "biased_split: predicate on '{}' matches zero rows in a client partition",
            p.feature
        )));
    }
    if rest.is_empty() {
        return Err(Error::Config(format!(
            "biased_split: predicate on '{}' matches every row in a client partition",
            p.feature
        )));
    }
    let mut out = Vec::with_capacity(size);
    draw(&matching, want, rng, &mut out);
    draw(&rest, size - want, rng, &mut out);
    out.shuffle(rng);
    Ok(out)
}

/// Draws `count` indices from `from`: a subset when possible, otherwise
/// with replacement.
fn draw(from: &[usize], count: usize, rng: &mut ChaCha8Rng, out: &mut Vec<usize>) {
    if count <= from.len() {
        let mut shuffled = from.to_vec();
        shuffled.shuffle(rng);
        out.extend_from_slice(&shuffled[..count]);
    } else {
        out.extend((0..count).map(|_| from[rng.gen_range(0..from.len())]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::dataset::Value;
    use crate::data::schema::{Feature, FeatureSchema};
    use rand::RngCore;

    /// Dataset with a categorical pay column where pay=1 holds for ~30% of
    /// rows, plus one continuous column.
    fn pay_dataset(m: usize, seed: u64) -> Dataset {
        let schema = FeatureSchema::new(vec![
            Feature::categorical("pay", &["1", "2"]),
            Feature::continuous("x"),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..m)
            .map(|_| {
                let pay = if rng.gen::<f64>() < 0.3 { "1" } else { "2" };
                vec![
                    Value::Cat(pay.into()),
                    Value::Float(rng.next_u32() as f64 / u32::MAX as f64),
                ]
            })
            .collect();
        Dataset::new(schema, rows, "paytab").unwrap()
    }

    fn pay_fraction(d: &Dataset) -> f64 {
        let idx = d.schema.feature_index("pay").unwrap();
        let hits = d
            .rows()
            .iter()
            .filter(|r| r[idx] == Value::Cat("1".into()))
            .count();
        hits as f64 / d.n_rows() as f64
    }

    fn pay_predicate(fraction: f64) -> SplitPredicate {
        SplitPredicate {
            feature: "pay".into(),
            matching: PredicateSet::Values(vec!["1".into()]),
            fraction,
        }
    }

    #[test]
    fn achieves_target_fraction_within_one_row() {
        let d = pay_dataset(4000, 5);
        let split = biased_split(&d, &[pay_predicate(0.6)], 1, 42).unwrap();
        let client = &split.clients[0];
        let hits = (pay_fraction(client) * client.n_rows() as f64).round();
        let want = (0.6 * client.n_rows() as f64).round();
        assert!((hits - want).abs() <= 1.0, "hits {hits} want {want}");
    }

    #[test]
    fn three_predicates_three_clients_plus_public() {
        let d = pay_dataset(3000, 9);
        let preds = vec![pay_predicate(0.5), pay_predicate(0.2), pay_predicate(0.4)];
        let split = biased_split(&d, &preds, 3, 1).unwrap();
        assert_eq!(split.clients.len(), 3);
        assert!(split.public.n_rows() >= 1400);
        for (c, want) in split.clients.iter().zip([0.5, 0.2, 0.4]) {
            assert!((pay_fraction(c) - want).abs() < 0.01);
            assert_eq!(c.schema, d.schema);
        }
    }

    #[test]
    fn matching_source_fraction_is_a_noop_bias() {
        let d = pay_dataset(6000, 2);
        let base = pay_fraction(&d);
        let split = biased_split(&d, &[pay_predicate(base)], 1, 7).unwrap();
        assert!((pay_fraction(&split.clients[0]) - base).abs() < 0.02);
    }

    #[test]
    fn deterministic_under_seed() {
        let d = pay_dataset(1000, 3);
        let a = biased_split(&d, &[pay_predicate(0.7)], 2, 99).unwrap();
        let b = biased_split(&d, &[pay_predicate(0.7)], 2, 99).unwrap();
        for (x, y) in a.clients.iter().zip(&b.clients) {
            assert_eq!(x.rows(), y.rows());
        }
        assert_eq!(a.public.rows(), b.public.rows());
    }

    #[test]
    fn zero_match_predicate_is_rejected() {
        let d = pay_dataset(100, 3);
        let pred = SplitPredicate {
            feature: "pay".into(),
            matching: PredicateSet::Values(vec!["zzz".into()]),
            fraction: 0.5,
        };
        let err = biased_split(&d, &[pred], 1, 0).unwrap_err();
        assert!(err.to_string().contains("zero rows"));
    }

    #[test]
    fn range_predicate_on_continuous_feature() {
        let d = pay_dataset(2000, 8);
        let pred = SplitPredicate {
            feature: "x".into(),
            matching: PredicateSet::Range { min: 0.5, max: 1.0 },
            fraction: 0.8,
        };
        let split = biased_split(&d, &[pred], 1, 4).unwrap();
        let idx = d.schema.feature_index("x").unwrap();
        let hits = split.clients[0]
            .rows()
            .iter()
            .filter(|r| r[idx].as_float().unwrap() >= 0.5)
            .count() as f64;
        let frac = hits / split.clients[0].n_rows() as f64;
        assert!((frac - 0.8).abs() < 0.01, "fraction {frac}");
    }
}
