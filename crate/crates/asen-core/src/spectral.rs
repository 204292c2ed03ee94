//! Vegetation indices and feature-vector assembly from per-band reflectance.
//!
//! A [`BandRecord`] carries the eleven Landsat 8/9 band values of one pixel
//! or field. Index formulas are written over semantic band names (NIR, red,
//! green, blue); a [`BandMapping`] decides which stored band feeds each
//! semantic slot, with [`BandMapping::landsat8`] as the default (NIR = band
//! 5, red = band 4, green = band 3, blue = band 2).
//!
//! Indices with a degenerate denominator are reported as [`None`] rather
//! than NaN; downstream ingestion drops and counts such samples.

use alloc::string::String;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

/// Number of stored bands per record.
pub const NUM_BANDS: usize = 11;

/// One sample's band values: TOA reflectance for bands 1–9, brightness
/// temperature-derived values for bands 10–11. All values must be finite and
/// the reflectance bands non-negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandRecord {
    pub coastal: f64,
    pub blue: f64,
    pub green: f64,
    pub red: f64,
    pub nir: f64,
    pub swir1: f64,
    pub swir2: f64,
    pub pan: f64,
    pub cirrus: f64,
    pub tir1: f64,
    pub tir2: f64,
}

/// Identifies one stored band of a [`BandRecord`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BandField {
    Coastal,
    Blue,
    Green,
    Red,
    Nir,
    Swir1,
    Swir2,
    Pan,
    Cirrus,
    Tir1,
    Tir2,
}

impl BandField {
    pub const ALL: [BandField; NUM_BANDS] = [
        BandField::Coastal,
        BandField::Blue,
        BandField::Green,
        BandField::Red,
        BandField::Nir,
        BandField::Swir1,
        BandField::Swir2,
        BandField::Pan,
        BandField::Cirrus,
        BandField::Tir1,
        BandField::Tir2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BandField::Coastal => "coastal",
            BandField::Blue => "blue",
            BandField::Green => "green",
            BandField::Red => "red",
            BandField::Nir => "nir",
            BandField::Swir1 => "swir1",
            BandField::Swir2 => "swir2",
            BandField::Pan => "pan",
            BandField::Cirrus => "cirrus",
            BandField::Tir1 => "tir1",
            BandField::Tir2 => "tir2",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|b| b.name() == name)
    }
}

impl BandRecord {
    /// Builds a record from band values ordered as in [`BandField::ALL`],
    /// validating finiteness and non-negative reflectance.
    pub fn from_bands(values: [f64; NUM_BANDS]) -> Result<Self, SpectralError> {
        let rec = BandRecord {
            coastal: values[0],
            blue: values[1],
            green: values[2],
            red: values[3],
            nir: values[4],
            swir1: values[5],
            swir2: values[6],
            pan: values[7],
            cirrus: values[8],
            tir1: values[9],
            tir2: values[10],
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn get(&self, field: BandField) -> f64 {
        match field {
            BandField::Coastal => self.coastal,
            BandField::Blue => self.blue,
            BandField::Green => self.green,
            BandField::Red => self.red,
            BandField::Nir => self.nir,
            BandField::Swir1 => self.swir1,
            BandField::Swir2 => self.swir2,
            BandField::Pan => self.pan,
            BandField::Cirrus => self.cirrus,
            BandField::Tir1 => self.tir1,
            BandField::Tir2 => self.tir2,
        }
    }

    /// Checks the record invariants: all bands finite, reflectance bands
    /// (coastal through cirrus) non-negative.
    pub fn validate(&self) -> Result<(), SpectralError> {
        for field in BandField::ALL {
            let v = self.get(field);
            if !v.is_finite() {
                return Err(SpectralError::NonFiniteBand(field));
            }
            let is_reflectance = !matches!(field, BandField::Tir1 | BandField::Tir2);
            if is_reflectance && v < 0.0 {
                return Err(SpectralError::NegativeReflectance(field));
            }
        }
        Ok(())
    }
}

/// Semantic band roles referenced by the index formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemanticBand {
    Coastal,
    Blue,
    Green,
    Red,
    Nir,
    Swir1,
    Swir2,
}

impl SemanticBand {
    pub const ALL: [SemanticBand; 7] = [
        SemanticBand::Coastal,
        SemanticBand::Blue,
        SemanticBand::Green,
        SemanticBand::Red,
        SemanticBand::Nir,
        SemanticBand::Swir1,
        SemanticBand::Swir2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SemanticBand::Coastal => "coastal",
            SemanticBand::Blue => "blue",
            SemanticBand::Green => "green",
            SemanticBand::Red => "red",
            SemanticBand::Nir => "nir",
            SemanticBand::Swir1 => "swir1",
            SemanticBand::Swir2 => "swir2",
        }
    }
}

/// Injective assignment of semantic bands to stored bands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BandMapping {
    coastal: BandField,
    blue: BandField,
    green: BandField,
    red: BandField,
    nir: BandField,
    swir1: BandField,
    swir2: BandField,
}

impl BandMapping {
    /// Landsat 8/9 assignment: each semantic band reads its same-named
    /// stored band (NIR = band 5, red = band 4, green = band 3, blue = band 2).
    pub fn landsat8() -> Self {
        BandMapping {
            coastal: BandField::Coastal,
            blue: BandField::Blue,
            green: BandField::Green,
            red: BandField::Red,
            nir: BandField::Nir,
            swir1: BandField::Swir1,
            swir2: BandField::Swir2,
        }
    }

    /// Builds a mapping from `(semantic, source)` pairs, validating that the
    /// assignment is injective. Unlisted semantic bands keep the Landsat 8
    /// default.
    pub fn with_overrides(
        overrides: &[(SemanticBand, BandField)],
    ) -> Result<Self, SpectralError> {
        let mut map = Self::landsat8();
        for &(sem, field) in overrides {
            match sem {
                SemanticBand::Coastal => map.coastal = field,
                SemanticBand::Blue => map.blue = field,
                SemanticBand::Green => map.green = field,
                SemanticBand::Red => map.red = field,
                SemanticBand::Nir => map.nir = field,
                SemanticBand::Swir1 => map.swir1 = field,
                SemanticBand::Swir2 => map.swir2 = field,
            }
        }
        let sources = [
            map.coastal,
            map.blue,
            map.green,
            map.red,
            map.nir,
            map.swir1,
            map.swir2,
        ];
        for (i, a) in sources.iter().enumerate() {
            for b in sources.iter().skip(i + 1) {
                if a == b {
                    return Err(SpectralError::DuplicateMapping(*a));
                }
            }
        }
        Ok(map)
    }

    pub fn source(&self, sem: SemanticBand) -> BandField {
        match sem {
            SemanticBand::Coastal => self.coastal,
            SemanticBand::Blue => self.blue,
            SemanticBand::Green => self.green,
            SemanticBand::Red => self.red,
            SemanticBand::Nir => self.nir,
            SemanticBand::Swir1 => self.swir1,
            SemanticBand::Swir2 => self.swir2,
        }
    }
}

impl Default for BandMapping {
    fn default() -> Self {
        Self::landsat8()
    }
}

/// The ten vegetation indices. `None` marks a value whose denominator was
/// degenerate for this record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexVector {
    pub ndvi: Option<f64>,
    pub evi: Option<f64>,
    pub savi: Option<f64>,
    pub gndvi: Option<f64>,
    pub rendvi: Option<f64>,
    pub msavi: Option<f64>,
    pub ndwi: Option<f64>,
    pub ndre: Option<f64>,
    pub sr: Option<f64>,
    pub pri: Option<f64>,
}

/// Identifies one vegetation index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexKind {
    Ndvi,
    Evi,
    Savi,
    Gndvi,
    Rendvi,
    Msavi,
    Ndwi,
    Ndre,
    Sr,
    Pri,
}

impl IndexKind {
    pub const ALL: [IndexKind; 10] = [
        IndexKind::Ndvi,
        IndexKind::Evi,
        IndexKind::Savi,
        IndexKind::Gndvi,
        IndexKind::Rendvi,
        IndexKind::Msavi,
        IndexKind::Ndwi,
        IndexKind::Ndre,
        IndexKind::Sr,
        IndexKind::Pri,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IndexKind::Ndvi => "ndvi",
            IndexKind::Evi => "evi",
            IndexKind::Savi => "savi",
            IndexKind::Gndvi => "gndvi",
            IndexKind::Rendvi => "rendvi",
            IndexKind::Msavi => "msavi",
            IndexKind::Ndwi => "ndwi",
            IndexKind::Ndre => "ndre",
            IndexKind::Sr => "sr",
            IndexKind::Pri => "pri",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }
}

impl IndexVector {
    pub fn get(&self, kind: IndexKind) -> Option<f64> {
        match kind {
            IndexKind::Ndvi => self.ndvi,
            IndexKind::Evi => self.evi,
            IndexKind::Savi => self.savi,
            IndexKind::Gndvi => self.gndvi,
            IndexKind::Rendvi => self.rendvi,
            IndexKind::Msavi => self.msavi,
            IndexKind::Ndwi => self.ndwi,
            IndexKind::Ndre => self.ndre,
            IndexKind::Sr => self.sr,
            IndexKind::Pri => self.pri,
        }
    }

    /// True when every index was computable.
    pub fn is_complete(&self) -> bool {
        IndexKind::ALL.iter().all(|&k| self.get(k).is_some())
    }
}

/// Errors from band validation and feature assembly.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralError {
    NonFiniteBand(BandField),
    NegativeReflectance(BandField),
    /// `a + b = 0` in a normalized difference.
    DegenerateDenominator,
    /// The square-root argument of the modified soil-adjusted index went
    /// negative, which is impossible for validated records.
    NegativeRadicand,
    /// A selected index was not computable for this record.
    DegenerateIndex(IndexKind),
    UnknownFeature(String),
    DuplicateMapping(BandField),
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::NonFiniteBand(b) => write!(f, "band '{}' is not finite", b.name()),
            SpectralError::NegativeReflectance(b) => {
                write!(f, "reflectance band '{}' is negative", b.name())
            }
            SpectralError::DegenerateDenominator => {
                write!(f, "normalized difference denominator is zero")
            }
            SpectralError::NegativeRadicand => {
                write!(f, "internal error: negative radicand in soil-adjusted index")
            }
            SpectralError::DegenerateIndex(k) => {
                write!(f, "index '{}' is not computable for this record", k.name())
            }
            SpectralError::UnknownFeature(name) => write!(f, "unknown feature name '{name}'"),
            SpectralError::DuplicateMapping(b) => {
                write!(f, "band '{}' mapped to more than one semantic band", b.name())
            }
        }
    }
}

impl core::error::Error for SpectralError {}

/// `(a - b) / (a + b)` for non-negative reflectances.
///
/// Shared kernel of the normalized-difference indices; the result lies in
/// `[-1, 1]` whenever both inputs are non-negative.
pub fn normalized_difference(a: f64, b: f64) -> Result<f64, SpectralError> {
    if a + b == 0.0 {
        return Err(SpectralError::DegenerateDenominator);
    }
    Ok((a - b) / (a + b))
}

fn nd_opt(a: f64, b: f64) -> Option<f64> {
    normalized_difference(a, b).ok()
}

/// Computes all ten indices for one record under the given band mapping.
///
/// Indices with a degenerate denominator come back as `None`. NDRE and
/// RENDVI coincide on Landsat 8/9 — the sensor has no red-edge band, so both
/// reduce to the NIR/red normalized difference and duplicate NDVI; they stay
/// separate outputs so the duplication is observable.
pub fn compute_indices(
    rec: &BandRecord,
    mapping: &BandMapping,
) -> Result<IndexVector, SpectralError> {
    let blue = rec.get(mapping.source(SemanticBand::Blue));
    let green = rec.get(mapping.source(SemanticBand::Green));
    let red = rec.get(mapping.source(SemanticBand::Red));
    let nir = rec.get(mapping.source(SemanticBand::Nir));

    let ndvi = nd_opt(nir, red);

    let evi_den = nir + 6.0 * red - 7.5 * blue + 1.0;
    let evi = if evi_den > 0.0 {
        Some(2.5 * (nir - red) / evi_den)
    } else {
        None
    };

    let savi_den = nir + red + 0.5;
    let savi = if savi_den > 0.0 {
        Some(1.5 * (nir - red) / savi_den)
    } else {
        None
    };

    let gndvi = nd_opt(nir, green);
    let rendvi = nd_opt(nir, red);

    let t = 2.0 * nir + 1.0;
    let radicand = t * t - 8.0 * (nir - red);
    if radicand < 0.0 {
        return Err(SpectralError::NegativeRadicand);
    }
    let msavi = Some(0.5 * (t - libm::sqrt(radicand)));

    let ndwi = nd_opt(green, nir);
    let ndre = rendvi;
    let sr = if red > 0.0 { Some(nir / red) } else { None };
    let pri = nd_opt(red, nir);

    Ok(IndexVector {
        ndvi,
        evi,
        savi,
        gndvi,
        rendvi,
        msavi,
        ndwi,
        ndre,
        sr,
        pri,
    })
}

/// One entry of a feature selection: either a stored band or a derived index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Feature {
    Band(BandField),
    Index(IndexKind),
}

impl Feature {
    pub fn name(self) -> &'static str {
        match self {
            Feature::Band(b) => b.name(),
            Feature::Index(k) => k.name(),
        }
    }

    pub fn parse(name: &str) -> Result<Self, SpectralError> {
        if let Some(b) = BandField::parse(name) {
            return Ok(Feature::Band(b));
        }
        if let Some(k) = IndexKind::parse(name) {
            return Ok(Feature::Index(k));
        }
        Err(SpectralError::UnknownFeature(name.to_string()))
    }
}

/// Parses an ordered feature-name list.
pub fn parse_feature_names(names: &[&str]) -> Result<Vec<Feature>, SpectralError> {
    names.iter().map(|n| Feature::parse(n)).collect()
}

/// The default 11-entry selection: six reflectance bands plus five indices.
pub fn default_features() -> Vec<Feature> {
    alloc::vec![
        Feature::Band(BandField::Blue),
        Feature::Band(BandField::Green),
        Feature::Band(BandField::Red),
        Feature::Band(BandField::Nir),
        Feature::Band(BandField::Swir1),
        Feature::Band(BandField::Swir2),
        Feature::Index(IndexKind::Ndvi),
        Feature::Index(IndexKind::Evi),
        Feature::Index(IndexKind::Savi),
        Feature::Index(IndexKind::Gndvi),
        Feature::Index(IndexKind::Ndre),
    ]
}

/// Assembles the feature vector for one record in selection order.
///
/// Fails if a selected index was degenerate for this record; callers drop
/// and count such samples.
pub fn build_feature_vector(
    rec: &BandRecord,
    indices: &IndexVector,
    selection: &[Feature],
) -> Result<Vec<f64>, SpectralError> {
    let mut out = Vec::with_capacity(selection.len());
    for &feat in selection {
        match feat {
            Feature::Band(b) => out.push(rec.get(b)),
            Feature::Index(k) => match indices.get(k) {
                Some(v) => out.push(v),
                None => return Err(SpectralError::DegenerateIndex(k)),
            },
        }
    }
    Ok(out)
}
