//! VM types, hourly prices and the price rank used to measure distances
//! between VM-type mappings.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Default billing granularity: one hour.
pub const DEFAULT_BILLING_SECONDS: f64 = 3600.0;

/// Bytes per MB when converting bandwidth in MB/s to bytes per second.
pub const BYTES_PER_MB: f64 = 1.0e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("malformed catalog: {0}")]
    MalformedInput(String),
    #[error("duplicate VM type `{0}`")]
    DuplicateName(String),
    #[error("VM type `{name}` has non-positive {field}")]
    NonPositiveField { name: String, field: &'static str },
    #[error("catalog has no VM types")]
    Empty,
    #[error("unknown VM type `{0}`")]
    UnknownType(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmType {
    pub name: String,
    pub compute_units: f64,
    #[serde(rename = "bandwidth_mbps")]
    pub bandwidth: f64,
    #[serde(rename = "price_per_hour")]
    pub price: f64,
}

impl VmType {
    pub fn new(name: impl Into<String>, compute_units: f64, bandwidth: f64, price: f64) -> Self {
        VmType {
            name: name.into(),
            compute_units,
            bandwidth,
            price,
        }
    }

    /// Bandwidth in bytes per second.
    pub fn bytes_per_second(&self) -> f64 {
        self.bandwidth * BYTES_PER_MB
    }
}

/// An immutable set of VM types, stored in price-rank order.
///
/// Index `k` in [`Catalog::types`] is the type with rank `k`: prices are
/// non-decreasing with rank and ties are broken by name.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    types: Vec<VmType>,
    by_name: HashMap<String, usize>,
    billing_seconds: f64,
}

#[derive(Serialize, Deserialize)]
struct CatalogDoc {
    #[serde(default = "default_billing")]
    billing_seconds: f64,
    types: Vec<VmType>,
}

fn default_billing() -> f64 {
    DEFAULT_BILLING_SECONDS
}

impl Catalog {
    pub fn new(types: Vec<VmType>, billing_seconds: f64) -> Result<Self, CatalogError> {
        if types.is_empty() {
            return Err(CatalogError::Empty);
        }
        if !billing_seconds.is_finite() || billing_seconds <= 0.0 {
            return Err(CatalogError::MalformedInput(format!(
                "billing_seconds must be positive, got {billing_seconds}"
            )));
        }
        for t in &types {
            for (field, v) in [
                ("compute_units", t.compute_units),
                ("bandwidth", t.bandwidth),
                ("price", t.price),
            ] {
                if !v.is_finite() || v <= 0.0 {
                    return Err(CatalogError::NonPositiveField {
                        name: t.name.clone(),
                        field,
                    });
                }
            }
        }
        let mut types = types;
        types.sort_by(|a, b| a.price.total_cmp(&b.price).then_with(|| a.name.cmp(&b.name)));
        let mut by_name = HashMap::with_capacity(types.len());
        for (i, t) in types.iter().enumerate() {
            if by_name.insert(t.name.clone(), i).is_some() {
                return Err(CatalogError::DuplicateName(t.name.clone()));
            }
        }
        Ok(Catalog {
            types,
            by_name,
            billing_seconds,
        })
    }

    /// Types in rank order.
    pub fn types(&self) -> &[VmType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn billing_seconds(&self) -> f64 {
        self.billing_seconds
    }

    /// Price rank of a type, 0 for the cheapest.
    pub fn rank(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&VmType> {
        self.rank(name).map(|r| &self.types[r])
    }

    pub fn by_rank(&self, rank: usize) -> &VmType {
        &self.types[rank]
    }

    /// Rank of the type with the most compute units (cheapest on ties).
    pub fn fastest(&self) -> usize {
        (0..self.len())
            .max_by(|&a, &b| {
                self.types[a]
                    .compute_units
                    .total_cmp(&self.types[b].compute_units)
                    .then(b.cmp(&a))
            })
            .expect("catalog is never empty")
    }

    pub fn to_json(&self) -> String {
        let doc = CatalogDoc {
            billing_seconds: self.billing_seconds,
            types: self.types.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("catalog serialization is infallible")
    }

    /// Hex SHA-256 of the canonical JSON form; embedded in reports.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// The eight EC2 on-demand types (US East) used throughout the evaluation.
pub fn default_catalog() -> Catalog {
    let types = vec![
        VmType::new("m3.medium", 3.75, 85.2, 0.067),
        VmType::new("m4.large", 7.5, 35.2, 0.1),
        VmType::new("m3.large", 7.5, 85.2, 0.133),
        VmType::new("m4.xlarge", 15.0, 68.0, 0.2),
        VmType::new("m3.xlarge", 15.0, 131.0, 0.266),
        VmType::new("m4.2xlarge", 30.0, 131.0, 0.4),
        VmType::new("m3.2xlarge", 40.0, 131.0, 0.532),
        VmType::new("m4.4xlarge", 45.0, 181.0, 0.8),
    ];
    Catalog::new(types, DEFAULT_BILLING_SECONDS).expect("built-in catalog is valid")
}

/// Loads a catalog from JSON (`{"billing_seconds", "types": [...]}`) or CSV
/// with header `name,compute_units,bandwidth_mbps,price_per_hour`.
pub fn load_catalog(text: &str) -> Result<Catalog, CatalogError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let doc: CatalogDoc = serde_json::from_str(text).map_err(|e| {
            CatalogError::MalformedInput(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        Catalog::new(doc.types, doc.billing_seconds)
    } else {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let types = reader
            .deserialize::<VmType>()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CatalogError::MalformedInput(e.to_string()))?;
        Catalog::new(types, DEFAULT_BILLING_SECONDS)
    }
}
