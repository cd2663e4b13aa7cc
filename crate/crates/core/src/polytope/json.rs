use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{wulff_shape, Polytope};
use crate::error::{Error, Result};

/// On-disk polytope: the halfspace data plus derived vertices and facets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeRecord {
    pub dim: usize,
    pub normals: Vec<Vec<f64>>,
    pub support: Vec<f64>,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<FacetRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetRecord {
    pub normal_index: usize,
    pub area: f64,
    pub active: bool,
}

impl Polytope {
    pub fn to_record(&self) -> PolytopeRecord {
        PolytopeRecord {
            dim: self.dim,
            normals: self.normals.iter().map(|v| v.iter().copied().collect()).collect(),
            support: self.support.clone(),
            vertices: self.vertices.iter().map(|v| v.iter().copied().collect()).collect(),
            facets: self
                .facets
                .iter()
                .enumerate()
                .map(|(i, f)| FacetRecord { normal_index: i, area: f.area, active: f.active })
                .collect(),
        }
    }

    /// Rebuilds from the halfspace data; derived fields in the record are
    /// recomputed rather than trusted.
    pub fn from_record(record: &PolytopeRecord) -> Result<Polytope> {
        if record.normals.len() != record.support.len() {
            return Err(Error::DimensionMismatch { expected: record.normals.len(), found: record.support.len() });
        }
        let normals: Vec<DVector<f64>> = record
            .normals
            .iter()
            .map(|v| {
                if v.len() == record.dim {
                    Ok(DVector::from_column_slice(v))
                } else {
                    Err(Error::DimensionMismatch { expected: record.dim, found: v.len() })
                }
            })
            .collect::<Result<_>>()?;
        wulff_shape(&normals, &record.support)
    }

    pub fn from_json(text: &str) -> Result<Polytope> {
        let record: PolytopeRecord = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_record(&record)
    }
}
