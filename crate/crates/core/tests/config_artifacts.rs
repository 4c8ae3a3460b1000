//! Config hashing and artifact round trips.

use fastfront::config::RunConfig;
use fastfront::io::{field_from_table, field_table, profile_from_table, profile_table, ArtifactStore, Table};
use fastfront::pde::{Field, Grid};
use fastfront::profile::{shoot_inner, ProfileOdeSpec, ShootingConfig};
use proptest::prelude::*;

const SECTIONS: [&str; 4] = [
    "[model]\nm = 0.5\nbeta = 1.2\nr = 0.9\nrbar = 1.0\nalpha = 4.0\nCbar = 1.0\nx0 = 2.0\ns0 = 0.1\neps = 0.25\n",
    "[grid]\nx_left = -20.0\nh = 0.05\nratio = 1.01\n",
    "[time]\nt_first = 10.0\nt_end = 200.0\ncount = 41\n",
    "[analysis]\nlambdas = [0.1, 0.5]\nfit_from = 10.0\n",
];

fn assemble(order: &[usize], reverse_keys: bool) -> String {
    let mut s = String::from("schema_version = 1\n");
    for &i in order {
        let mut lines: Vec<&str> = SECTIONS[i].lines().collect();
        if reverse_keys {
            lines[1..].reverse();
        }
        s.push_str(&lines.join("\n"));
        s.push_str("\n\n");
    }
    s
}

proptest! {
    #[test]
    fn hash_ignores_key_and_section_order(order in Just(vec![0usize, 1, 2, 3]).prop_shuffle(), rev in any::<bool>()) {
        let base = RunConfig::from_toml(&assemble(&[0, 1, 2, 3], false)).unwrap();
        let other = RunConfig::from_toml(&assemble(&order, rev)).unwrap();
        prop_assert_eq!(base.hash(), other.hash());
    }
}

#[test]
fn hash_changes_with_settings() {
    let base = RunConfig::from_toml(&assemble(&[0, 1, 2, 3], false)).unwrap();
    let changed = RunConfig::from_toml(&assemble(&[0, 1, 2, 3], false).replace("h = 0.05", "h = 0.04")).unwrap();
    assert_ne!(base.hash(), changed.hash());
    let again = RunConfig::from_toml(&base.to_toml()).unwrap();
    assert_eq!(base, again);
}

#[test]
fn profile_survives_the_artifact_store() {
    let spec = ProfileOdeSpec::new(0.5, 1.2, 1.0).unwrap();
    let cfg = ShootingConfig { z_max: 1e3, ..ShootingConfig::default() };
    let (sol, _) = shoot_inner(&spec, 0.14, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut store = ArtifactStore::open(dir.path(), "abc", true).unwrap();
    let (table, meta) = profile_table(&sol);
    assert_eq!(table.columns, vec!["z", "phi", "q"]);
    store.write_table("profile", &table, &meta).unwrap();
    store.save().unwrap();

    let store = ArtifactStore::open(dir.path(), "abc", true).unwrap();
    assert!(store.is_intact("profile.csv"));
    let (t, m) = store.read_table("profile").unwrap();
    assert_eq!(profile_from_table(&t, m).unwrap(), sol);
    assert!(ArtifactStore::open(dir.path(), "other", true).is_err());
}

#[test]
fn snapshot_tables_roundtrip_bit_exactly() {
    let grid = Grid::stretched(-3.0, 0.1, 1.0, 1.1, 100.0).unwrap();
    let f = Field { t: 1.0 / 3.0, values: grid.nodes.iter().map(|x| 1.0 / (1.0 + (x + 3.0).powf(4.3))).collect() };
    let bytes = field_table(&grid, &f).to_csv_bytes().unwrap();
    assert!(bytes.starts_with(b"x,u\n"));
    let (g, back) = field_from_table(&Table::from_csv_bytes(&bytes).unwrap(), f.t).unwrap();
    assert_eq!(g.nodes, grid.nodes);
    assert_eq!(back, f);
}
