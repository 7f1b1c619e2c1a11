//! Disordered coin configurations: static maps, p-diluted space-time coin
//! maps, and their file format.
//!
//! A static map assigns one of three coin settings to every lattice site.
//! Dilution perturbs it cell by cell: with probability `p` the cell gets a
//! fresh uniform draw, with probability `1 - p` it keeps the static label.
//! All draws come from counter-based streams keyed by
//! `(master_seed, map_index)`, so a map is fully determined by its provenance
//! and can be regenerated in any order or thread layout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{derive_stream, Stream};
use crate::walk::CoinOperator;

#[derive(Debug, Error)]
pub enum DisorderError {
    #[error("dilution probability must be in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("coin map json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("coin map field `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
}

/// The three experimentally available coin settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoinLabel {
    #[serde(rename = "I")]
    Identity,
    #[serde(rename = "B")]
    Balanced,
    #[serde(rename = "R")]
    Reflection,
}

impl CoinLabel {
    pub const ALL: [CoinLabel; 3] = [
        CoinLabel::Identity,
        CoinLabel::Balanced,
        CoinLabel::Reflection,
    ];

    /// Rotation angle of the corresponding coin operator.
    pub fn theta(self) -> f64 {
        match self {
            CoinLabel::Identity => 0.0,
            CoinLabel::Balanced => std::f64::consts::FRAC_PI_4,
            CoinLabel::Reflection => std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn operator(self) -> CoinOperator {
        CoinOperator::new(self.theta()).expect("label angles are finite")
    }

    fn from_index(i: u64) -> CoinLabel {
        Self::ALL[i as usize]
    }
}

/// How a diluted cell is resampled.
///
/// The model statement leaves open whether a replaced coin may coincide with
/// the static one; `All` allows it (effective disorder rate `p·2/3`),
/// `ExcludeStatic` forces a change (effective rate `p`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResampleRule {
    #[default]
    All,
    ExcludeStatic,
}

/// Position-dependent, time-independent coin assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticMap {
    half_width: usize,
    labels: Vec<CoinLabel>,
}

impl StaticMap {
    /// Draw each site's label i.i.d. uniformly from the three settings.
    pub fn generate(seed: u64, half_width: usize) -> StaticMap {
        assert!(half_width >= 1, "half_width must be at least 1");
        let stream = Stream::new(seed);
        let labels = (0..2 * half_width + 1)
            .map(|i| CoinLabel::from_index(stream.below(i as u64, 3)))
            .collect();
        StaticMap { half_width, labels }
    }

    /// Wrap an explicit label assignment; the length must be odd (`2T + 1`).
    pub fn from_labels(labels: Vec<CoinLabel>) -> StaticMap {
        assert!(labels.len() % 2 == 1, "static map needs 2T + 1 sites");
        StaticMap {
            half_width: (labels.len() - 1) / 2,
            labels,
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Label at position `x ∈ [-T, T]`.
    pub fn label(&self, x: i64) -> CoinLabel {
        self.labels[(x + self.half_width as i64) as usize]
    }

    pub fn labels(&self) -> &[CoinLabel] {
        &self.labels
    }
}

/// A full space-time coin assignment: one disorder realization.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinMap {
    half_width: usize,
    steps: usize,
    /// Row-major over `t = 1..=steps`, then `x = -T..=T`.
    labels: Vec<CoinLabel>,
    provenance: Provenance,
}

/// Seeds and parameters that determine a coin map.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub p: f64,
    pub master_seed: u64,
    pub map_index: u64,
    pub static_base: StaticMap,
}

impl CoinMap {
    /// Perturb `static_base` into a p-diluted space-time map.
    ///
    /// Every cell `(x, t)` draws independently: with probability `p` it takes
    /// a fresh label per `rule`, otherwise it copies the static one. The map
    /// covers the full rectangle `x ∈ [-T, T]`, `t ∈ [1, steps]`, unreachable
    /// cells included.
    pub fn dilute(
        static_base: &StaticMap,
        p: f64,
        seed: u64,
        steps: usize,
        rule: ResampleRule,
    ) -> Result<CoinMap, DisorderError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(DisorderError::InvalidProbability(p));
        }
        let half_width = static_base.half_width();
        let width = 2 * half_width + 1;
        let stream = Stream::new(seed);
        let mut labels = Vec::with_capacity(steps * width);
        for t in 1..=steps {
            for i in 0..width {
                let static_label = static_base.labels()[i];
                let cell = stream.substream(((t - 1) * width + i) as u64);
                let resampled = cell.unit_f64(0) < p;
                let label = if resampled {
                    match rule {
                        ResampleRule::All => CoinLabel::from_index(cell.below(1, 3)),
                        ResampleRule::ExcludeStatic => {
                            let alternatives: Vec<CoinLabel> = CoinLabel::ALL
                                .into_iter()
                                .filter(|&l| l != static_label)
                                .collect();
                            alternatives[cell.below(1, 2) as usize]
                        }
                    }
                } else {
                    static_label
                };
                labels.push(label);
            }
        }
        Ok(CoinMap {
            half_width,
            steps,
            labels,
            provenance: Provenance {
                p,
                master_seed: 0,
                map_index: 0,
                static_base: static_base.clone(),
            },
        })
    }

    /// Generate the complete map for `(master_seed, map_index)`: a fresh
    /// static base, then dilution. This is the ensemble entry point.
    pub fn generate(
        master_seed: u64,
        map_index: u64,
        p: f64,
        half_width: usize,
        steps: usize,
        rule: ResampleRule,
    ) -> Result<CoinMap, DisorderError> {
        let map_stream = derive_stream(master_seed, map_index);
        let static_base = StaticMap::generate(derive_stream(map_stream, 0), half_width);
        let mut map = CoinMap::dilute(&static_base, p, derive_stream(map_stream, 1), steps, rule)?;
        map.provenance.master_seed = master_seed;
        map.provenance.map_index = map_index;
        Ok(map)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Label at cell `(x, t)` with `t ∈ [1, steps]`.
    pub fn label(&self, x: i64, t: usize) -> CoinLabel {
        let width = 2 * self.half_width + 1;
        let i = (x + self.half_width as i64) as usize;
        self.labels[(t - 1) * width + i]
    }

    /// All labels, row-major over `t` then `x`.
    pub fn labels(&self) -> &[CoinLabel] {
        &self.labels
    }

    /// Coin operators for step `t`, aligned to the lattice.
    pub fn coin_row(&self, t: usize) -> Vec<CoinOperator> {
        let width = 2 * self.half_width + 1;
        self.labels[(t - 1) * width..t * width]
            .iter()
            .map(|l| l.operator())
            .collect()
    }

    /// Serialize to the coin-map JSON format.
    pub fn to_json(&self) -> String {
        let file = MapFile {
            half_width: self.half_width,
            steps: self.steps,
            p: self.provenance.p,
            master_seed: self.provenance.master_seed,
            map_index: self.provenance.map_index,
            static_labels: self.provenance.static_base.labels().to_vec(),
            labels: self.labels.clone(),
        };
        serde_json::to_string_pretty(&file).expect("coin map serialization")
    }

    /// Parse the coin-map JSON format, validating dimensions and ranges.
    pub fn from_json(text: &str) -> Result<CoinMap, DisorderError> {
        let file: MapFile = serde_json::from_str(text)?;
        if !(0.0..=1.0).contains(&file.p) {
            return Err(DisorderError::InvalidField {
                field: "p",
                reason: format!("must be in [0, 1], got {}", file.p),
            });
        }
        if file.half_width == 0 {
            return Err(DisorderError::InvalidField {
                field: "half_width",
                reason: "must be at least 1".into(),
            });
        }
        let width = 2 * file.half_width + 1;
        if file.static_labels.len() != width {
            return Err(DisorderError::InvalidField {
                field: "static_labels",
                reason: format!(
                    "expected {} entries, got {}",
                    width,
                    file.static_labels.len()
                ),
            });
        }
        if file.labels.len() != file.steps * width {
            return Err(DisorderError::InvalidField {
                field: "labels",
                reason: format!(
                    "expected {} entries ({} steps x {} sites), got {}",
                    file.steps * width,
                    file.steps,
                    width,
                    file.labels.len()
                ),
            });
        }
        Ok(CoinMap {
            half_width: file.half_width,
            steps: file.steps,
            labels: file.labels,
            provenance: Provenance {
                p: file.p,
                master_seed: file.master_seed,
                map_index: file.map_index,
                static_base: StaticMap {
                    half_width: file.half_width,
                    labels: file.static_labels,
                },
            },
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    half_width: usize,
    steps: usize,
    p: f64,
    master_seed: u64,
    map_index: u64,
    static_labels: Vec<CoinLabel>,
    labels: Vec<CoinLabel>,
}

/// Parameters of one disorder ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub p: f64,
    pub maps: usize,
    pub steps: usize,
    pub recorded_steps: Vec<usize>,
    pub master_seed: u64,
    #[serde(default)]
    pub resample: ResampleRule,
}

impl DisorderSpec {
    pub fn new(
        p: f64,
        maps: usize,
        steps: usize,
        recorded_steps: Vec<usize>,
        master_seed: u64,
    ) -> Result<DisorderSpec, DisorderError> {
        let spec = DisorderSpec {
            p,
            maps,
            steps,
            recorded_steps,
            master_seed,
            resample: ResampleRule::All,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DisorderError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(DisorderError::InvalidProbability(self.p));
        }
        if self.maps == 0 {
            return Err(DisorderError::InvalidField {
                field: "maps",
                reason: "must be at least 1".into(),
            });
        }
        if self.steps == 0 {
            return Err(DisorderError::InvalidField {
                field: "steps",
                reason: "must be at least 1".into(),
            });
        }
        if self.recorded_steps.is_empty()
            || self.recorded_steps.iter().any(|&t| t < 1 || t > self.steps)
        {
            return Err(DisorderError::InvalidField {
                field: "recorded_steps",
                reason: format!("entries must lie in [1, {}]", self.steps),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_map_to_the_three_coin_angles() {
        assert_eq!(CoinLabel::ALL.len(), 3);
        assert_eq!(CoinLabel::Identity.theta(), 0.0);
        assert_eq!(CoinLabel::Balanced.theta(), std::f64::consts::FRAC_PI_4);
        assert_eq!(CoinLabel::Reflection.theta(), std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn static_map_is_deterministic() {
        let a = StaticMap::generate(99, 20);
        let b = StaticMap::generate(99, 20);
        assert_eq!(a, b);
    }

    #[test]
    fn static_map_label_frequencies_near_uniform() {
        // aggregate over many seeds: 30_000+ sites total
        let mut counts = [0usize; 3];
        for seed in 0..750 {
            let m = StaticMap::generate(seed, 20);
            for &l in m.labels() {
                counts[CoinLabel::ALL.iter().position(|&x| x == l).unwrap()] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        assert_eq!(total, 750 * 41);
        for &c in &counts {
            let freq = c as f64 / total as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.01, "freq = {freq}");
        }
    }

    #[test]
    fn distinct_seeds_give_distinct_maps() {
        let a = StaticMap::generate(1, 20);
        let b = StaticMap::generate(2, 20);
        let differing = a
            .labels()
            .iter()
            .zip(b.labels())
            .filter(|(x, y)| x != y)
            .count();
        assert!(differing >= 1);
    }

    #[test]
    fn zero_dilution_copies_static_base_exactly() {
        let base = StaticMap::generate(7, 12);
        let map = CoinMap::dilute(&base, 0.0, 123, 12, ResampleRule::All).unwrap();
        for t in 1..=12 {
            for x in -12..=12 {
                assert_eq!(map.label(x, t), base.label(x));
            }
        }
    }

    #[test]
    fn full_dilution_changes_about_two_thirds() {
        let base = StaticMap::generate(3, 20);
        let map = CoinMap::dilute(&base, 1.0, 11, 20, ResampleRule::All).unwrap();
        let width = 2 * 20 + 1;
        let cells = (20 * width) as f64;
        let changed = (1..=20)
            .flat_map(|t| (-20..=20).map(move |x| (x, t)))
            .filter(|&(x, t)| map.label(x, t) != base.label(x))
            .count() as f64;
        // fresh uniform draw matches the old label w.p. 1/3
        let expect = cells * 2.0 / 3.0;
        let sigma = (cells * (2.0 / 3.0) * (1.0 / 3.0)).sqrt();
        assert!(
            (changed - expect).abs() < 3.0 * sigma,
            "changed = {changed}, expect = {expect}"
        );
    }

    #[test]
    fn exclude_static_rule_always_changes_resampled_cells() {
        let base = StaticMap::generate(3, 10);
        let map = CoinMap::dilute(&base, 1.0, 11, 10, ResampleRule::ExcludeStatic).unwrap();
        for t in 1..=10 {
            for x in -10..=10 {
                assert_ne!(map.label(x, t), base.label(x));
            }
        }
    }

    #[test]
    fn resample_rate_tracks_p() {
        // track resample events directly by comparing against a p=0 clone;
        // cells whose draw kept the static label are invisible here, so
        // compare the observed change rate against p * 2/3.
        let p = 0.3;
        let base = StaticMap::generate(17, 20);
        let map = CoinMap::dilute(&base, p, 5, 20, ResampleRule::All).unwrap();
        let width = 41;
        let cells = (20 * width) as f64;
        let changed = (1..=20)
            .flat_map(|t| (-20..=20).map(move |x| (x, t)))
            .filter(|&(x, t)| map.label(x, t) != base.label(x))
            .count() as f64;
        let expect = cells * p * 2.0 / 3.0;
        let sigma = (cells * p * (2.0 / 3.0) * (1.0 - p * 2.0 / 3.0)).sqrt();
        assert!(
            (changed - expect).abs() < 3.0 * sigma,
            "changed = {changed}, expect = {expect}"
        );
    }

    #[test]
    fn aggregate_resample_rate_over_thousand_maps() {
        // under ExcludeStatic every resample event is visible as a changed
        // label, so the change rate measures the Bernoulli rate directly
        let p = 0.3;
        let (half_width, steps) = (10usize, 10usize);
        let cells_per_map = (2 * half_width + 1) * steps;
        let mut changed = 0usize;
        for m in 0..1000u64 {
            let map = CoinMap::generate(606, m, p, half_width, steps, ResampleRule::ExcludeStatic)
                .unwrap();
            let base = &map.provenance().static_base;
            changed += (1..=steps)
                .flat_map(|t| (-(half_width as i64)..=half_width as i64).map(move |x| (x, t)))
                .filter(|&(x, t)| map.label(x, t) != base.label(x))
                .count();
        }
        let total = (1000 * cells_per_map) as f64;
        let rate = changed as f64 / total;
        let sigma = (p * (1.0 - p) / total).sqrt();
        assert!(
            (rate - p).abs() < 4.0 * sigma,
            "rate = {rate}, expect {p} within {:.2e}",
            4.0 * sigma
        );
    }

    #[test]
    fn dilute_rejects_bad_probability() {
        let base = StaticMap::generate(0, 4);
        assert!(matches!(
            CoinMap::dilute(&base, 1.5, 0, 4, ResampleRule::All),
            Err(DisorderError::InvalidProbability(_))
        ));
        assert!(CoinMap::dilute(&base, -0.1, 0, 4, ResampleRule::All).is_err());
    }

    #[test]
    fn generate_is_deterministic_in_seed_and_index() {
        let a = CoinMap::generate(42, 3, 0.4, 20, 20, ResampleRule::All).unwrap();
        let b = CoinMap::generate(42, 3, 0.4, 20, 20, ResampleRule::All).unwrap();
        assert_eq!(a, b);
        let c = CoinMap::generate(42, 4, 0.4, 20, 20, ResampleRule::All).unwrap();
        assert_ne!(a.labels(), c.labels());
    }

    #[test]
    fn json_round_trip_preserves_map() {
        let map = CoinMap::generate(9, 1, 0.25, 6, 6, ResampleRule::All).unwrap();
        let text = map.to_json();
        let parsed = CoinMap::from_json(&text).unwrap();
        assert_eq!(map, parsed);
    }

    #[test]
    fn truncated_json_is_an_error() {
        let map = CoinMap::generate(9, 1, 0.25, 6, 6, ResampleRule::All).unwrap();
        let text = map.to_json();
        let truncated = &text[..text.len() / 2];
        assert!(CoinMap::from_json(truncated).is_err());
    }

    #[test]
    fn hand_written_map_loads_with_declared_labels() {
        let text = r#"{
            "half_width": 3, "steps": 3, "p": 0.5,
            "master_seed": 1, "map_index": 0,
            "static_labels": ["I","I","B","B","B","R","R"],
            "labels": ["I","I","B","B","B","R","R",
                       "B","B","B","B","B","B","B",
                       "R","I","R","I","R","I","R"]
        }"#;
        let map = CoinMap::from_json(text).unwrap();
        assert_eq!(map.label(-3, 1), CoinLabel::Identity);
        assert_eq!(map.label(0, 2), CoinLabel::Balanced);
        assert_eq!(map.label(3, 3), CoinLabel::Reflection);
        assert_eq!(map.provenance().static_base.label(0), CoinLabel::Balanced);
    }

    #[test]
    fn dimension_mismatch_is_a_field_error() {
        let text = r#"{
            "half_width": 2, "steps": 2, "p": 0.0,
            "master_seed": 0, "map_index": 0,
            "static_labels": ["I","I","I","I","I"],
            "labels": ["I","I","I"]
        }"#;
        match CoinMap::from_json(text) {
            Err(DisorderError::InvalidField { field, .. }) => assert_eq!(field, "labels"),
            other => panic!("expected field error, got {other:?}"),
        }
    }

    #[test]
    fn spec_validation_catches_bad_recorded_steps() {
        assert!(DisorderSpec::new(0.2, 10, 20, vec![5, 25], 1).is_err());
        assert!(DisorderSpec::new(0.2, 10, 20, vec![], 1).is_err());
        assert!(DisorderSpec::new(0.2, 0, 20, vec![5], 1).is_err());
        assert!(DisorderSpec::new(1.2, 10, 20, vec![5], 1).is_err());
        assert!(DisorderSpec::new(0.2, 10, 20, vec![5, 20], 1).is_ok());
    }
}
