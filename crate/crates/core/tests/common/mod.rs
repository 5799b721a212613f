//! Fixture loading shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use qconv::convolution::{build_fusion_bialgebra, build_group_algebra};
use qconv::{FnAlgebra, FusionRing, GroupTable};

pub const RING_FIXTURES: [&str; 7] = ["z2", "z3", "z4", "z2xz2", "s3", "fibonacci", "ising"];
pub const GROUP_FIXTURES: [&str; 5] = ["z4", "z6", "s3", "q8", "z2xz2"];
/// Rings that come from groups, hence are categorifiable.
pub const GROUP_RINGS: [&str; 5] = ["z2", "z3", "z4", "z2xz2", "s3"];

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn read(rel: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn ring(name: &str) -> FusionRing {
    serde_json::from_value(read(&format!("rings/{name}.json"))).expect("ring fixture parses")
}

pub fn group(name: &str) -> GroupTable {
    serde_json::from_value(read(&format!("groups/{name}.json"))).expect("group fixture parses")
}

/// Every FN fixture: group algebras of the group fixtures and the fusion
/// bialgebras of the commutative ring fixtures.
pub fn fn_fixtures() -> Vec<(String, FnAlgebra)> {
    let mut out: Vec<(String, FnAlgebra)> = GROUP_FIXTURES
        .iter()
        .map(|g| (format!("group {g}"), build_group_algebra(&group(g)).expect("group algebra")))
        .collect();
    for r in RING_FIXTURES {
        let ring = ring(r);
        if ring.is_commutative() {
            out.push((format!("ring {r}"), build_fusion_bialgebra(&ring).expect("fusion bialgebra")));
        }
    }
    out
}

/// Group algebras of every group of order at most 8.
pub fn small_group_algebras() -> Vec<(&'static str, GroupTable, FnAlgebra)> {
    GroupTable::all_up_to_order_8()
        .into_iter()
        .map(|(n, g)| {
            let a = build_group_algebra(&g).expect("group algebra");
            (n, g, a)
        })
        .collect()
}
