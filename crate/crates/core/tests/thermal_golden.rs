//! Pins the reference simulation at the nominal process parameters. Any change
//! to the solver, the source term or the reference config shows up here.

use meltpool_rom::thermal::{self, ProcessParameters, ThermalConfig};
use sha2::{Digest, Sha256};

const GOLDEN_BEAD_VOLUME: f64 = 0.23000000000000004;
const GOLDEN_MAX_TEMP: f64 = 3428.5518010170845;
const GOLDEN_DIGEST: &str = "778f93b1f92b7fc9f0abf132baab1278168670d2e23c6cf3db0681538c1c07bd";

#[test]
fn nominal_reference_run_matches_golden_record() {
    let cfg = ThermalConfig::reference();
    let rec = thermal::run(&ProcessParameters::nominal(), &cfg.material, &cfg.grid).unwrap();
    assert!(rec.melted);
    let mut h = Sha256::new();
    for v in rec.series_temp.iter().chain(&rec.series_volume) {
        h.update(v.to_le_bytes());
    }
    let digest = hex::encode(h.finalize());
    assert_eq!(rec.bead_volume.to_bits(), GOLDEN_BEAD_VOLUME.to_bits());
    assert_eq!(rec.max_temp.to_bits(), GOLDEN_MAX_TEMP.to_bits());
    assert_eq!(digest, GOLDEN_DIGEST);
}
