use serde::{Deserialize, Serialize};

use crate::geometry::{
    build_tensor_lattice, AuxMap, BoundaryCondition, BoundaryEdge, Cell, CellMap, DirichletData,
    Edge, Interface, Lattice, LevelSet, TensorBcTags, ThresholdField, ThresholdParams,
    TractionData,
};
use crate::{Error, Result};

pub const LATTICE_FORMAT_VERSION: u32 = 1;

/// Serializable auxiliary map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AuxMapSpec {
    Identity,
    QuarterAnnulus { r0: f64, r1: f64 },
    WingSlab { chord: f64, thickness: f64, s0: f64, s1: f64 },
}

impl AuxMapSpec {
    pub fn to_map(&self) -> AuxMap {
        match *self {
            AuxMapSpec::Identity => AuxMap::Identity,
            AuxMapSpec::QuarterAnnulus { r0, r1 } => AuxMap::QuarterAnnulus { r0, r1 },
            AuxMapSpec::WingSlab { chord, thickness, s0, s1 } => {
                AuxMap::WingSlab { chord, thickness, s0, s1 }
            }
        }
    }

    pub fn from_map(map: &AuxMap) -> Result<Self> {
        Ok(match *map {
            AuxMap::Identity => AuxMapSpec::Identity,
            AuxMap::QuarterAnnulus { r0, r1 } => AuxMapSpec::QuarterAnnulus { r0, r1 },
            AuxMap::WingSlab { chord, thickness, s0, s1 } => {
                AuxMapSpec::WingSlab { chord, thickness, s0, s1 }
            }
            AuxMap::Custom(_) => {
                return Err(Error::Config("custom auxiliary maps are not serializable".into()))
            }
        })
    }
}

/// Serializable cell map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapSpec {
    Rect { origin: [f64; 2], size: [f64; 2] },
    Bilinear { corners: [[f64; 2]; 4] },
    TensorPoly { degrees: (usize, usize), coeffs: Vec<[f64; 2]> },
    AuxSub { aux: AuxMapSpec, origin: [f64; 2], size: [f64; 2] },
}

impl MapSpec {
    pub fn to_map(&self) -> CellMap {
        match self {
            MapSpec::Rect { origin, size } => CellMap::Rect { origin: *origin, size: *size },
            MapSpec::Bilinear { corners } => CellMap::Bilinear { corners: *corners },
            MapSpec::TensorPoly { degrees, coeffs } => {
                CellMap::TensorPoly { degrees: *degrees, coeffs: coeffs.clone() }
            }
            MapSpec::AuxSub { aux, origin, size } => {
                CellMap::AuxSub { aux: aux.to_map(), origin: *origin, size: *size }
            }
        }
    }

    pub fn from_map(map: &CellMap) -> Result<Self> {
        Ok(match map {
            CellMap::Rect { origin, size } => MapSpec::Rect { origin: *origin, size: *size },
            CellMap::Bilinear { corners } => MapSpec::Bilinear { corners: *corners },
            CellMap::TensorPoly { degrees, coeffs } => {
                MapSpec::TensorPoly { degrees: *degrees, coeffs: coeffs.clone() }
            }
            CellMap::AuxSub { aux, origin, size } => MapSpec::AuxSub {
                aux: AuxMapSpec::from_map(aux)?,
                origin: *origin,
                size: *size,
            },
        })
    }
}

/// Serializable boundary condition (constant data only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BcSpec {
    Free,
    Dirichlet { value: [f64; 2] },
    Traction { value: [f64; 2] },
}

impl BcSpec {
    pub fn to_bc(&self) -> BoundaryCondition {
        match self {
            BcSpec::Free => BoundaryCondition::Free,
            BcSpec::Dirichlet { value } => {
                BoundaryCondition::Dirichlet(DirichletData::Constant(*value))
            }
            BcSpec::Traction { value } => {
                BoundaryCondition::Traction(TractionData::Constant(*value))
            }
        }
    }

    pub fn from_bc(bc: &BoundaryCondition) -> Result<Self> {
        Ok(match bc {
            BoundaryCondition::Free => BcSpec::Free,
            BoundaryCondition::Dirichlet(DirichletData::Constant(v)) => {
                BcSpec::Dirichlet { value: *v }
            }
            BoundaryCondition::Traction(TractionData::Constant(v)) => {
                BcSpec::Traction { value: *v }
            }
            _ => {
                return Err(Error::Config(
                    "function-valued boundary data is not serializable".into(),
                ))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub map: MapSpec,
    pub thresholds: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTag {
    pub cell: usize,
    pub edge: Edge,
    pub bc: BcSpec,
}

/// Tensor-grid side tags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SideTags {
    #[serde(default)]
    pub left: Option<BcSpec>,
    #[serde(default)]
    pub right: Option<BcSpec>,
    #[serde(default)]
    pub bottom: Option<BcSpec>,
    #[serde(default)]
    pub top: Option<BcSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeometrySpec {
    /// `n1 x n2` restriction of an auxiliary map with a threshold field.
    Tensor {
        aux: AuxMapSpec,
        n1: usize,
        n2: usize,
        thresholds: ThresholdField,
        #[serde(default)]
        sides: SideTags,
    },
    /// Explicit cell list with adjacency and boundary tags.
    Explicit {
        cells: Vec<CellSpec>,
        interfaces: Vec<Interface>,
        boundary: Vec<BoundaryTag>,
    },
}

/// On-disk lattice description (JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeFile {
    pub version: u32,
    pub level_set: String,
    pub geometry: GeometrySpec,
}

impl LatticeFile {
    pub fn to_lattice(&self) -> Result<Lattice> {
        if self.version != LATTICE_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "lattice file version {} unsupported (expected {LATTICE_FORMAT_VERSION})",
                self.version
            )));
        }
        let level_set = LevelSet::from_kind_name(&self.level_set).ok_or_else(|| {
            Error::Config(format!("unknown level-set kind '{}'", self.level_set))
        })?;
        match &self.geometry {
            GeometrySpec::Tensor { aux, n1, n2, thresholds, sides } => {
                let tags = TensorBcTags {
                    left: sides.left.as_ref().map_or(BoundaryCondition::Free, |b| b.to_bc()),
                    right: sides.right.as_ref().map_or(BoundaryCondition::Free, |b| b.to_bc()),
                    bottom: sides.bottom.as_ref().map_or(BoundaryCondition::Free, |b| b.to_bc()),
                    top: sides.top.as_ref().map_or(BoundaryCondition::Free, |b| b.to_bc()),
                };
                Ok(build_tensor_lattice(aux.to_map(), *n1, *n2, level_set, thresholds, &tags))
            }
            GeometrySpec::Explicit { cells, interfaces, boundary } => {
                let cells: Vec<Cell> = cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        Cell::new(i, c.map.to_map(), level_set.clone(), ThresholdParams(c.thresholds))
                    })
                    .collect();
                // every non-interface edge must carry a (possibly free) tag
                let mut taken: std::collections::HashSet<(usize, Edge)> =
                    std::collections::HashSet::new();
                for iface in interfaces {
                    taken.insert(iface.a);
                    taken.insert(iface.b);
                }
                let tags: std::collections::HashMap<(usize, Edge), BcSpec> = boundary
                    .iter()
                    .map(|t| ((t.cell, t.edge), t.bc.clone()))
                    .collect();
                let mut bedges = Vec::new();
                for i in 0..cells.len() {
                    for edge in Edge::ALL {
                        if taken.contains(&(i, edge)) {
                            continue;
                        }
                        let bc = tags
                            .get(&(i, edge))
                            .map_or(BoundaryCondition::Free, |b| b.to_bc());
                        bedges.push(BoundaryEdge { cell: i, edge, bc });
                    }
                }
                Ok(Lattice { cells, interfaces: interfaces.clone(), boundary: bedges })
            }
        }
    }

    /// Serialize a lattice as an explicit cell list.
    pub fn from_lattice(lattice: &Lattice) -> Result<Self> {
        let level_set = lattice.cells[0].level_set.kind_name().to_string();
        if LevelSet::from_kind_name(&level_set).is_none() {
            return Err(Error::Config("custom level sets are not serializable".into()));
        }
        let cells = lattice
            .cells
            .iter()
            .map(|c| {
                Ok(CellSpec { map: MapSpec::from_map(&c.map)?, thresholds: c.thresholds.0 })
            })
            .collect::<Result<Vec<_>>>()?;
        let boundary = lattice
            .boundary
            .iter()
            .filter(|b| !matches!(b.bc, BoundaryCondition::Free))
            .map(|b| Ok(BoundaryTag { cell: b.cell, edge: b.edge, bc: BcSpec::from_bc(&b.bc)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(LatticeFile {
            version: LATTICE_FORMAT_VERSION,
            level_set,
            geometry: GeometrySpec::Explicit {
                cells,
                interfaces: lattice.interfaces.clone(),
                boundary,
            },
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
