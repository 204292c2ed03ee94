//! Tabular dataset handling: samples, normalization, splitting, bootstrap
//! resampling, and a synthetic generator for desk-scale experiments.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::rng::rng_from_seed;
use crate::spectral::{
    build_feature_vector, compute_indices, BandMapping, BandRecord, Feature,
};

/// One labelled sample: a feature vector plus its class index into the
/// dataset's class list.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: usize,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub source: Option<String>,
}

impl LabeledSample {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        LabeledSample {
            features,
            label,
            latitude: None,
            longitude: None,
            source: None,
        }
    }
}

/// An immutable labelled dataset with declared feature and class names.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    samples: Vec<LabeledSample>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
    provenance: String,
}

/// Errors from dataset construction and the operations in this module.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetError {
    DuplicateFeatureName(String),
    DuplicateClassName(String),
    FeatureLengthMismatch { expected: usize, got: usize },
    LabelOutOfRange { label: usize, classes: usize },
    NonFiniteFeature { sample: usize, feature: usize },
    EmptyInput,
    UnknownFeatureName(String),
    InvalidFractions,
    ClassTooSmall { class: String, count: usize },
    DimensionMismatch { expected: usize, got: usize },
    InvalidSyntheticSpec(String),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::DuplicateFeatureName(n) => write!(f, "duplicate feature name '{n}'"),
            DatasetError::DuplicateClassName(n) => write!(f, "duplicate class name '{n}'"),
            DatasetError::FeatureLengthMismatch { expected, got } => {
                write!(f, "feature vector length {got} does not match declared {expected}")
            }
            DatasetError::LabelOutOfRange { label, classes } => {
                write!(f, "label index {label} out of range for {classes} classes")
            }
            DatasetError::NonFiniteFeature { sample, feature } => {
                write!(f, "non-finite value in sample {sample}, feature {feature}")
            }
            DatasetError::EmptyInput => write!(f, "operation requires a non-empty input"),
            DatasetError::UnknownFeatureName(n) => write!(f, "unknown feature name '{n}'"),
            DatasetError::InvalidFractions => {
                write!(f, "split fractions must be positive and sum to 1")
            }
            DatasetError::ClassTooSmall { class, count } => {
                write!(f, "class '{class}' has only {count} samples; at least 3 required")
            }
            DatasetError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            DatasetError::InvalidSyntheticSpec(msg) => write!(f, "invalid synthetic spec: {msg}"),
        }
    }
}

impl core::error::Error for DatasetError {}

fn check_distinct(names: &[String]) -> Option<String> {
    for (i, a) in names.iter().enumerate() {
        for b in names.iter().skip(i + 1) {
            if a == b {
                return Some(a.clone());
            }
        }
    }
    None
}

impl Dataset {
    pub fn new(
        samples: Vec<LabeledSample>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
        provenance: String,
    ) -> Result<Self, DatasetError> {
        if let Some(dup) = check_distinct(&feature_names) {
            return Err(DatasetError::DuplicateFeatureName(dup));
        }
        if let Some(dup) = check_distinct(&class_names) {
            return Err(DatasetError::DuplicateClassName(dup));
        }
        let dim = feature_names.len();
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != dim {
                return Err(DatasetError::FeatureLengthMismatch {
                    expected: dim,
                    got: s.features.len(),
                });
            }
            if s.label >= class_names.len() {
                return Err(DatasetError::LabelOutOfRange {
                    label: s.label,
                    classes: class_names.len(),
                });
            }
            for (j, v) in s.features.iter().enumerate() {
                if !v.is_finite() {
                    return Err(DatasetError::NonFiniteFeature { sample: i, feature: j });
                }
            }
        }
        Ok(Dataset {
            samples,
            feature_names,
            class_names,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Number of samples per class, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_names.len()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Copies the feature rows at `indices`.
    pub fn feature_rows(&self, indices: &[usize]) -> Vec<Vec<f64>> {
        indices.iter().map(|&i| self.samples[i].features.clone()).collect()
    }

    /// Labels at `indices`.
    pub fn labels(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.samples[i].label).collect()
    }

    /// Projects onto a feature subset. Columns keep this dataset's original
    /// order regardless of the order of `keep`, so projecting onto the full
    /// set is the identity.
    pub fn project(&self, keep: &[String]) -> Result<Dataset, DatasetError> {
        for name in keep {
            if !self.feature_names.contains(name) {
                return Err(DatasetError::UnknownFeatureName(name.clone()));
            }
        }
        let cols: Vec<usize> = self
            .feature_names
            .iter()
            .enumerate()
            .filter(|(_, n)| keep.contains(n))
            .map(|(i, _)| i)
            .collect();
        let feature_names: Vec<String> =
            cols.iter().map(|&i| self.feature_names[i].clone()).collect();
        let samples = self
            .samples
            .iter()
            .map(|s| LabeledSample {
                features: cols.iter().map(|&i| s.features[i]).collect(),
                label: s.label,
                latitude: s.latitude,
                longitude: s.longitude,
                source: s.source.clone(),
            })
            .collect();
        Dataset::new(
            samples,
            feature_names,
            self.class_names.clone(),
            format!("{}; projected to {} features", self.provenance, cols.len()),
        )
    }
}

/// Per-feature population mean and standard deviation for z-scoring.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationParams {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl NormalizationParams {
    /// Fits population moments over the given rows (the training portion).
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, DatasetError> {
        if rows.len() < 2 {
            return Err(DatasetError::EmptyInput);
        }
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in rows {
            if row.len() != dim {
                return Err(DatasetError::DimensionMismatch { expected: dim, got: row.len() });
            }
            for (m, v) in mean.iter_mut().zip(row.iter()) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row.iter()).zip(mean.iter()) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std = var.iter().map(|s| libm::sqrt(s / n)).collect();
        Ok(NormalizationParams { mean, std })
    }

    pub fn from_parts(mean: Vec<f64>, std: Vec<f64>) -> Result<Self, DatasetError> {
        if mean.len() != std.len() {
            return Err(DatasetError::DimensionMismatch {
                expected: mean.len(),
                got: std.len(),
            });
        }
        if std.iter().any(|s| !s.is_finite() || *s < 0.0)
            || mean.iter().any(|m| !m.is_finite())
        {
            return Err(DatasetError::InvalidSyntheticSpec(
                "normalization parameters must be finite with non-negative std".into(),
            ));
        }
        Ok(NormalizationParams { mean, std })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `z = (x - mean) / std` per feature; constant features (std = 0) map
    /// to 0 by treating their divisor as 1.
    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>, DatasetError> {
        if row.len() != self.mean.len() {
            return Err(DatasetError::DimensionMismatch {
                expected: self.mean.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(self.std.iter()))
            .map(|(x, (m, s))| (x - m) / if *s > 0.0 { *s } else { 1.0 })
            .collect())
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, DatasetError> {
        rows.iter().map(|r| self.apply_row(r)).collect()
    }

    /// Inverse transform, `x = z * std + mean`.
    pub fn invert_row(&self, row: &[f64]) -> Result<Vec<f64>, DatasetError> {
        if row.len() != self.mean.len() {
            return Err(DatasetError::DimensionMismatch {
                expected: self.mean.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(self.std.iter()))
            .map(|(z, (m, s))| z * if *s > 0.0 { *s } else { 1.0 } + m)
            .collect())
    }
}

/// Train/validation/test fractions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self, DatasetError> {
        let fr = SplitFractions { train, val, test };
        fr.validate()?;
        Ok(fr)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let ok = self.train > 0.0
            && self.val > 0.0
            && self.test > 0.0
            && ((self.train + self.val + self.test) - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(DatasetError::InvalidFractions)
        }
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.70,
            val: 0.15,
            test: 0.15,
        }
    }
}

/// Disjoint index lists covering `[0, N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub fractions: SplitFractions,
}

/// Stratified split with per-class largest-remainder rounding.
///
/// Within each class the exact fractional allocations are floored and
/// leftovers go to the splits with the largest remainders; remainder ties
/// are broken in favour of the split that is furthest below its exact
/// cumulative target so the global totals also follow largest-remainder
/// rounding. Shuffling within each class is seed-deterministic.
pub fn stratified_split(
    dataset: &Dataset,
    fractions: SplitFractions,
    seed: u64,
) -> Result<DatasetSplit, DatasetError> {
    fractions.validate()?;
    let num_classes = dataset.num_classes();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, s) in dataset.samples().iter().enumerate() {
        by_class[s.label].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < 3 {
            return Err(DatasetError::ClassTooSmall {
                class: dataset.class_names()[c].clone(),
                count: members.len(),
            });
        }
    }

    let fr = [fractions.train, fractions.val, fractions.test];
    let mut rng = rng_from_seed(seed);
    let mut out: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut cum_exact = [0.0f64; 3];
    let mut cum_alloc = [0usize; 3];

    for mut members in by_class {
        members.shuffle(&mut rng);
        let n = members.len();
        let exact: Vec<f64> = fr.iter().map(|f| f * n as f64).collect();
        let mut alloc: Vec<usize> = exact.iter().map(|e| libm::floor(*e) as usize).collect();
        let assigned: usize = alloc.iter().sum();
        let mut leftover = n - assigned;

        if leftover > 0 {
            // deficit of each split against its exact cumulative target,
            // measured before distributing this class's leftovers
            let deficit: Vec<f64> = (0..3)
                .map(|j| (cum_exact[j] + exact[j]) - (cum_alloc[j] + alloc[j]) as f64)
                .collect();
            let mut order: Vec<usize> = (0..3).collect();
            order.sort_by(|&a, &b| {
                let ra = exact[a] - libm::floor(exact[a]);
                let rb = exact[b] - libm::floor(exact[b]);
                rb.partial_cmp(&ra)
                    .unwrap()
                    .then(deficit[b].partial_cmp(&deficit[a]).unwrap())
                    .then(a.cmp(&b))
            });
            for &j in &order {
                if leftover == 0 {
                    break;
                }
                alloc[j] += 1;
                leftover -= 1;
            }
        }

        let mut offset = 0;
        for j in 0..3 {
            out[j].extend_from_slice(&members[offset..offset + alloc[j]]);
            offset += alloc[j];
            cum_exact[j] += exact[j];
            cum_alloc[j] += alloc[j];
        }
    }

    let [train, val, test] = out;
    Ok(DatasetSplit {
        train,
        val,
        test,
        fractions,
    })
}

/// Draws `n` indices of `[0, n)` uniformly with replacement.
pub fn bootstrap_sample(n: usize, seed: u64) -> Result<Vec<usize>, DatasetError> {
    if n == 0 {
        return Err(DatasetError::EmptyInput);
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..n).map(|_| rng.gen_range(0..n)).collect())
}

/// Bands modelled class-conditionally by the synthetic generator, in draw
/// order.
pub const SYNTHETIC_BANDS: [crate::spectral::BandField; 6] = [
    crate::spectral::BandField::Blue,
    crate::spectral::BandField::Green,
    crate::spectral::BandField::Red,
    crate::spectral::BandField::Nir,
    crate::spectral::BandField::Swir1,
    crate::spectral::BandField::Swir2,
];

/// Pulls the designated class means toward their common centroid;
/// `strength` 0 leaves them unchanged, 1 collapses them together.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionKnob {
    pub classes: Vec<usize>,
    pub strength: f64,
}

/// Class-conditional Gaussian spec over the six reflectance bands of
/// [`SYNTHETIC_BANDS`]. The remaining bands (coastal, pan, cirrus, and the
/// two thermal bands) are drawn class-independently around
/// `noise_band_mean`, so they carry no label signal by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub class_names: Vec<String>,
    pub class_counts: Vec<usize>,
    /// Per-class mean reflectance for [`SYNTHETIC_BANDS`], each in [0, 1].
    pub band_means: Vec<[f64; 6]>,
    /// Per-class standard deviation shared by the six modelled bands.
    pub band_scales: Vec<f64>,
    pub noise_band_mean: f64,
    pub noise_band_scale: f64,
    pub confusion: Option<ConfusionKnob>,
}

impl SyntheticSpec {
    /// Six-crop preset with spectrally distinct means; the confusion knob
    /// targets the three classes that overlap most in practice (potato,
    /// mustard, cotton).
    pub fn six_crops(counts: [usize; 6], confusion_strength: f64) -> Self {
        SyntheticSpec {
            class_names: vec![
                "sugarcane".into(),
                "wheat".into(),
                "potato".into(),
                "mustard".into(),
                "maize".into(),
                "cotton".into(),
            ],
            class_counts: counts.to_vec(),
            band_means: vec![
                // blue, green, red, nir, swir1, swir2
                [0.04, 0.08, 0.05, 0.62, 0.24, 0.12],
                [0.05, 0.10, 0.09, 0.52, 0.28, 0.15],
                [0.06, 0.12, 0.14, 0.42, 0.33, 0.20],
                [0.07, 0.13, 0.17, 0.38, 0.35, 0.22],
                [0.05, 0.11, 0.11, 0.47, 0.30, 0.17],
                [0.08, 0.14, 0.21, 0.33, 0.38, 0.26],
            ],
            band_scales: vec![0.020, 0.025, 0.022, 0.024, 0.028, 0.026],
            noise_band_mean: 0.2,
            noise_band_scale: 0.05,
            confusion: if confusion_strength > 0.0 {
                Some(ConfusionKnob {
                    classes: vec![2, 3, 5],
                    strength: confusion_strength,
                })
            } else {
                None
            },
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let c = self.class_names.len();
        if c == 0 {
            return Err(DatasetError::InvalidSyntheticSpec("zero classes".into()));
        }
        if self.class_counts.len() != c || self.band_means.len() != c || self.band_scales.len() != c
        {
            return Err(DatasetError::InvalidSyntheticSpec(
                "per-class field lengths disagree".into(),
            ));
        }
        if self.class_counts.iter().any(|&n| n == 0) {
            return Err(DatasetError::InvalidSyntheticSpec(
                "class counts must be positive".into(),
            ));
        }
        if self
            .band_means
            .iter()
            .flatten()
            .any(|m| !(0.0..=1.0).contains(m))
        {
            return Err(DatasetError::InvalidSyntheticSpec(
                "band means must lie in [0, 1]".into(),
            ));
        }
        if self.band_scales.iter().any(|s| !s.is_finite() || *s < 0.0)
            || !self.noise_band_scale.is_finite()
            || self.noise_band_scale < 0.0
            || !(0.0..=1.0).contains(&self.noise_band_mean)
        {
            return Err(DatasetError::InvalidSyntheticSpec("invalid scales".into()));
        }
        if let Some(knob) = &self.confusion {
            if !(0.0..=1.0).contains(&knob.strength) {
                return Err(DatasetError::InvalidSyntheticSpec(
                    "confusion strength must lie in [0, 1]".into(),
                ));
            }
            if knob.classes.iter().any(|&i| i >= c) || knob.classes.len() < 2 {
                return Err(DatasetError::InvalidSyntheticSpec(
                    "confusion knob must name at least two valid classes".into(),
                ));
            }
        }
        Ok(())
    }

    /// Class means after applying the confusion knob.
    pub fn effective_means(&self) -> Vec<[f64; 6]> {
        let mut means = self.band_means.clone();
        if let Some(knob) = &self.confusion {
            let mut centroid = [0.0; 6];
            for &c in &knob.classes {
                for (t, m) in centroid.iter_mut().zip(self.band_means[c].iter()) {
                    *t += m;
                }
            }
            for t in centroid.iter_mut() {
                *t /= knob.classes.len() as f64;
            }
            for &c in &knob.classes {
                for (m, t) in means[c].iter_mut().zip(centroid.iter()) {
                    *m += knob.strength * (*t - *m);
                }
            }
        }
        means
    }
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Draws band records class by class; deterministic in `(spec, seed)`.
/// Returns `(record, class_index)` pairs grouped by class.
pub fn generate_synthetic_records(
    spec: &SyntheticSpec,
    seed: u64,
) -> Result<Vec<(BandRecord, usize)>, DatasetError> {
    spec.validate()?;
    let means = spec.effective_means();
    let mut rng = rng_from_seed(seed);
    let total: usize = spec.class_counts.iter().sum();
    let mut out = Vec::with_capacity(total);
    let noise = Normal::new(spec.noise_band_mean, spec.noise_band_scale)
        .map_err(|_| DatasetError::InvalidSyntheticSpec("noise scale".into()))?;
    for (class, &count) in spec.class_counts.iter().enumerate() {
        let dists: Vec<Normal<f64>> = means[class]
            .iter()
            .map(|&m| Normal::new(m, spec.band_scales[class]))
            .collect::<Result<_, _>>()
            .map_err(|_| DatasetError::InvalidSyntheticSpec("band scale".into()))?;
        for _ in 0..count {
            let mut bands = [0.0f64; 6];
            for (b, d) in bands.iter_mut().zip(dists.iter()) {
                *b = clamp01(d.sample(&mut rng));
            }
            let coastal = clamp01(noise.sample(&mut rng));
            let pan = clamp01(noise.sample(&mut rng));
            let cirrus = clamp01(noise.sample(&mut rng));
            let tir1 = clamp01(noise.sample(&mut rng));
            let tir2 = clamp01(noise.sample(&mut rng));
            let rec = BandRecord {
                coastal,
                blue: bands[0],
                green: bands[1],
                red: bands[2],
                nir: bands[3],
                swir1: bands[4],
                swir2: bands[5],
                pan,
                cirrus,
                tir1,
                tir2,
            };
            out.push((rec, class));
        }
    }
    Ok(out)
}

/// Counters for rows dropped while assembling a dataset from band records.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AssemblyStats {
    pub rows_in: usize,
    pub dropped_invalid_band: usize,
    pub dropped_degenerate_index: usize,
}

/// Builds feature vectors for each `(record, label)` pair, dropping and
/// counting records that fail band validation or have a degenerate selected
/// index.
pub fn assemble_dataset(
    records: &[(BandRecord, usize)],
    class_names: Vec<String>,
    selection: &[Feature],
    mapping: &BandMapping,
    provenance: String,
) -> Result<(Dataset, AssemblyStats), DatasetError> {
    let mut stats = AssemblyStats {
        rows_in: records.len(),
        ..AssemblyStats::default()
    };
    let mut samples = Vec::with_capacity(records.len());
    for (rec, label) in records {
        if rec.validate().is_err() {
            stats.dropped_invalid_band += 1;
            continue;
        }
        let indices = match compute_indices(rec, mapping) {
            Ok(ix) => ix,
            Err(_) => {
                stats.dropped_invalid_band += 1;
                continue;
            }
        };
        match build_feature_vector(rec, &indices, selection) {
            Ok(features) => samples.push(LabeledSample::new(features, *label)),
            Err(_) => stats.dropped_degenerate_index += 1,
        }
    }
    if samples.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let feature_names = selection.iter().map(|f| String::from(f.name())).collect();
    let dataset = Dataset::new(samples, feature_names, class_names, provenance)?;
    Ok((dataset, stats))
}

/// Synthetic dataset: records drawn per [`generate_synthetic_records`], then
/// features assembled under `selection` and `mapping`.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    selection: &[Feature],
    mapping: &BandMapping,
    seed: u64,
) -> Result<(Dataset, AssemblyStats), DatasetError> {
    let records = generate_synthetic_records(spec, seed)?;
    assemble_dataset(
        &records,
        spec.class_names.clone(),
        selection,
        mapping,
        format!("synthetic(seed={seed})"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::default_features;

    fn toy_dataset(per_class: usize, classes: usize) -> Dataset {
        let mut samples = Vec::new();
        for c in 0..classes {
            for i in 0..per_class {
                samples.push(LabeledSample::new(vec![c as f64, i as f64], c));
            }
        }
        Dataset::new(
            samples,
            vec!["a".into(), "b".into()],
            (0..classes).map(|c| format!("class{c}")).collect(),
            "test".into(),
        )
        .unwrap()
    }

    #[test]
    fn dataset_validates_invariants() {
        let bad = Dataset::new(
            vec![LabeledSample::new(vec![1.0], 0)],
            vec!["a".into(), "a".into()],
            vec!["x".into()],
            String::new(),
        );
        assert!(matches!(bad, Err(DatasetError::DuplicateFeatureName(_))));
        let bad = Dataset::new(
            vec![LabeledSample::new(vec![1.0], 1)],
            vec!["a".into()],
            vec!["x".into()],
            String::new(),
        );
        assert!(matches!(bad, Err(DatasetError::LabelOutOfRange { .. })));
    }

    #[test]
    fn normalizer_matches_hand_population_moments() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let p = NormalizationParams::fit(&rows).unwrap();
        assert_eq!(p.mean()[0], 2.0);
        assert!((p.std()[0] - libm::sqrt(2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn normalizer_handles_constant_columns() {
        let rows = vec![vec![5.0], vec![5.0], vec![5.0]];
        let p = NormalizationParams::fit(&rows).unwrap();
        assert_eq!(p.mean()[0], 5.0);
        assert_eq!(p.std()[0], 0.0);
        // constant features map to 0 instead of dividing by zero
        assert_eq!(p.apply_row(&[5.0]).unwrap(), vec![0.0]);
        assert_eq!(p.apply_row(&[7.5]).unwrap(), vec![2.5]);
    }

    #[test]
    fn normalization_is_idempotent_on_standardized_data() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![(i % 7) as f64 * 1.3 - 2.0]).collect();
        let p = NormalizationParams::fit(&rows).unwrap();
        let z = p.apply(&rows).unwrap();
        let p2 = NormalizationParams::fit(&z).unwrap();
        assert!(p2.mean()[0].abs() < 1e-9);
        assert!((p2.std()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normalize_then_denormalize_recovers_inputs() {
        let rows: Vec<Vec<f64>> = (0..32)
            .map(|i| vec![i as f64 * 0.37 + 1.0, -(i as f64) * 2.1])
            .collect();
        let p = NormalizationParams::fit(&rows).unwrap();
        for row in &rows {
            let z = p.apply_row(row).unwrap();
            let back = p.invert_row(&z).unwrap();
            for (a, b) in row.iter().zip(back.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_maps_to_zero_and_mean_plus_std_to_one() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let p = NormalizationParams::fit(&rows).unwrap();
        let z = p.apply_row(&[p.mean()[0]]).unwrap();
        assert_eq!(z[0], 0.0);
        let z = p.apply_row(&[p.mean()[0] + p.std()[0]]).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn split_is_disjoint_exhaustive_and_balanced() {
        let ds = toy_dataset(50, 2);
        let split = stratified_split(&ds, SplitFractions::default(), 11).unwrap();
        assert_eq!(split.train.len(), 70);
        assert_eq!(split.val.len() + split.test.len(), 30);
        // per-class allocation: 35 train and {7, 8} val/test per class
        for c in 0..2 {
            let count = |ix: &[usize]| ix.iter().filter(|&&i| ds.samples()[i].label == c).count();
            assert_eq!(count(&split.train), 35);
            let v = count(&split.val);
            let t = count(&split.test);
            assert!(matches!((v, t), (7, 8) | (8, 7)));
        }
        let mut all: Vec<usize> = split
            .train
            .iter()
            .chain(&split.val)
            .chain(&split.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_seed_deterministic() {
        let ds = toy_dataset(40, 3);
        let a = stratified_split(&ds, SplitFractions::default(), 5).unwrap();
        let b = stratified_split(&ds, SplitFractions::default(), 5).unwrap();
        assert_eq!(a, b);
        let c = stratified_split(&ds, SplitFractions::default(), 6).unwrap();
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn split_rejects_tiny_classes() {
        let mut samples = Vec::new();
        for i in 0..10 {
            samples.push(LabeledSample::new(vec![i as f64], 0));
        }
        samples.push(LabeledSample::new(vec![99.0], 1));
        let ds = Dataset::new(
            samples,
            vec!["a".into()],
            vec!["big".into(), "tiny".into()],
            "t".into(),
        )
        .unwrap();
        let err = stratified_split(&ds, SplitFractions::default(), 0).unwrap_err();
        assert_eq!(
            err,
            DatasetError::ClassTooSmall { class: "tiny".into(), count: 1 }
        );
    }

    #[test]
    fn bootstrap_sample_contract() {
        assert!(bootstrap_sample(0, 1).is_err());
        assert_eq!(bootstrap_sample(1, 9).unwrap(), vec![0]);
        let a = bootstrap_sample(1000, 3).unwrap();
        let b = bootstrap_sample(1000, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
        assert!(a.iter().all(|&i| i < 1000));
    }

    #[test]
    fn synthetic_generation_is_deterministic() {
        let spec = SyntheticSpec::six_crops([20, 20, 20, 20, 20, 20], 0.3);
        let sel = default_features();
        let map = BandMapping::landsat8();
        let (a, sa) = generate_synthetic(&spec, &sel, &map, 42).unwrap();
        let (b, sb) = generate_synthetic(&spec, &sel, &map, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert_eq!(a.len(), 120);
        assert_eq!(a.num_classes(), 6);
        let (c, _) = generate_synthetic(&spec, &sel, &map, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_spec_is_rejected() {
        let mut spec = SyntheticSpec::six_crops([5; 6], 0.0);
        spec.class_names.clear();
        spec.class_counts.clear();
        spec.band_means.clear();
        spec.band_scales.clear();
        assert!(matches!(
            generate_synthetic_records(&spec, 0),
            Err(DatasetError::InvalidSyntheticSpec(_))
        ));
    }

    #[test]
    fn confusion_knob_pulls_means_together() {
        let spec0 = SyntheticSpec::six_crops([5; 6], 0.0);
        let spec1 = SyntheticSpec::six_crops([5; 6], 1.0);
        let m0 = spec0.effective_means();
        let m1 = spec1.effective_means();
        // with strength 1 the designated classes collapse onto one centroid
        assert_eq!(m1[2], m1[3]);
        assert_eq!(m1[3], m1[5]);
        assert_ne!(m0[2], m0[3]);
        // non-designated classes are untouched
        assert_eq!(m0[0], m1[0]);
    }

    #[test]
    fn projection_keeps_original_column_order() {
        let ds = toy_dataset(5, 2);
        let full = ds
            .project(&["b".to_string(), "a".to_string()])
            .unwrap();
        assert_eq!(full.feature_names(), ds.feature_names());
        assert_eq!(full.samples()[0].features, ds.samples()[0].features);
        let sub = ds.project(&["b".to_string()]).unwrap();
        assert_eq!(sub.feature_names(), &["b".to_string()]);
        assert_eq!(sub.samples()[1].features, vec![1.0]);
    }
}
