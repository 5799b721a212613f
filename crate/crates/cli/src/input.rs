//! Reads input files and recognizes their kind from the top-level keys.

use std::path::Path;

use qconv::algebra::{AlgebraSpec, Block};
use qconv::convolution::{
    build_fusion_bialgebra, build_group_algebra, ConvolutionError, ConvolutionStructure, StructureJson,
};
use qconv::{FnAlgebra, FusionRing, GroupTable};
use serde::Deserialize;
use serde_json::Value;

/// Failure to obtain a usable input. Every variant maps to exit code 2
/// except `Invariant`, which `validate` reports as a failed check.
#[derive(Debug)]
pub enum InputError {
    Io(String),
    Parse(String),
    Invariant(String),
    Unsupported(String),
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputError::Io(m) => write!(f, "cannot read input: {m}"),
            InputError::Parse(m) => write!(f, "malformed input: {m}"),
            InputError::Invariant(m) => write!(f, "invalid input: {m}"),
            InputError::Unsupported(m) => write!(f, "unsupported input: {m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Ring,
    Group,
    Structure,
    Spec,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Ring => "fusion_ring",
            Kind::Group => "group_table",
            Kind::Structure => "convolution_structure",
            Kind::Spec => "algebra_spec",
        }
    }
}

pub fn read_json(path: &Path) -> Result<Value, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError::Parse(format!("{}: {e}", path.display())))
}

pub fn detect(v: &Value) -> Result<Kind, InputError> {
    let obj = v
        .as_object()
        .ok_or_else(|| InputError::Parse("top level must be a JSON object".into()))?;
    if obj.contains_key("N") {
        Ok(Kind::Ring)
    } else if obj.contains_key("table") {
        Ok(Kind::Group)
    } else if obj.contains_key("tensor") {
        Ok(Kind::Structure)
    } else if obj.contains_key("blocks") {
        Ok(Kind::Spec)
    } else {
        Err(InputError::Parse(
            "unrecognized input: expected a fusion ring (\"N\"), group table (\"table\"), convolution structure (\"tensor\") or algebra spec (\"blocks\")".into(),
        ))
    }
}

fn parse<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, InputError> {
    T::deserialize(v).map_err(|e| InputError::Parse(e.to_string()))
}

pub fn ring(v: &Value) -> Result<FusionRing, InputError> {
    parse(v)
}

#[derive(Deserialize)]
struct RawGroup {
    order: usize,
    table: Vec<Vec<usize>>,
}

pub fn group(v: &Value) -> Result<GroupTable, InputError> {
    let raw: RawGroup = parse(v)?;
    GroupTable::new(raw.order, raw.table).map_err(|e| InputError::Invariant(e.to_string()))
}

#[derive(Deserialize)]
struct RawSpec {
    blocks: Vec<Block<f64>>,
}

pub fn spec(v: &Value) -> Result<AlgebraSpec<f64>, InputError> {
    let raw: RawSpec = parse(v)?;
    AlgebraSpec::new(raw.blocks).map_err(|e| InputError::Invariant(e.to_string()))
}

pub fn structure(v: &Value) -> Result<StructureJson, InputError> {
    // the embedded spec validates itself while parsing; surface that as an invariant failure
    let mut v = v.clone();
    if let Some(s) = v.get_mut("spec") {
        let sp = spec(s)?;
        *s = serde_json::to_value(sp).expect("spec serializes");
    }
    parse(&v)
}

/// A convolution ready for the checkers: a verified FN algebra, or a bare
/// structure when no antipode is available (or it failed verification).
pub enum Loaded {
    Fn(FnAlgebra),
    Plain {
        structure: ConvolutionStructure,
        antipode: Option<qconv::convolution::Antipode>,
        note: Option<String>,
    },
}

impl Loaded {
    pub fn structure(&self) -> &ConvolutionStructure {
        match self {
            Loaded::Fn(f) => f.structure(),
            Loaded::Plain { structure, .. } => structure,
        }
    }

    pub fn as_algebra(&self) -> &dyn qconv::inequality::ConvolutionAlgebra {
        match self {
            Loaded::Fn(f) => f,
            Loaded::Plain { structure, .. } => structure,
        }
    }
}

fn build_err(e: ConvolutionError) -> InputError {
    InputError::Invariant(e.to_string())
}

/// Builds the convolution described by `v`. Structures with an antipode are
/// verified with the given sampling parameters.
pub fn load_algebra(v: &Value, samples: usize, seed: u64, tol: f64) -> Result<(Kind, Loaded), InputError> {
    let kind = detect(v)?;
    let loaded = match kind {
        Kind::Ring => Loaded::Fn(build_fusion_bialgebra(&ring(v)?).map_err(build_err)?),
        Kind::Group => Loaded::Fn(build_group_algebra(&group(v)?).map_err(build_err)?),
        Kind::Structure => {
            let (s, rho) = structure(v)?.into_parts().map_err(build_err)?;
            match rho {
                Some(rho) => match FnAlgebra::verify(s.clone(), rho.clone(), samples, seed, tol) {
                    Ok(f) => Loaded::Fn(f),
                    Err(e) => Loaded::Plain {
                        structure: s,
                        antipode: Some(rho),
                        note: Some(format!("declared antipode rejected: {e}")),
                    },
                },
                None => Loaded::Plain {
                    structure: s,
                    antipode: None,
                    note: None,
                },
            }
        }
        Kind::Spec => {
            return Err(InputError::Unsupported(
                "an algebra spec carries no convolution; pass a group table, fusion ring or convolution structure".into(),
            ))
        }
    };
    Ok((kind, loaded))
}
