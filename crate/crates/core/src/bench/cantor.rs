//! Deterministic decoder x bundle regression matrix.

use serde::{Deserialize, Serialize};

use crate::code::{compose, logical_class, syndrome_of, CodeParams, DefectSet};
use crate::error::Result;
use crate::hdrg::{hdrg_run, Strategy};
use crate::noise::{bundle_lengths, cantor_bundle, BundleRegime};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorCell {
    pub strategy: Strategy,
    pub shortcuts: bool,
    pub regime: BundleRegime,
    pub level: u32,
    #[serde(rename = "L")]
    pub l: usize,
    pub expect_failure: bool,
    pub failed: bool,
}

impl CantorCell {
    pub fn ok(&self) -> bool {
        self.expect_failure == self.failed
    }
}

/// Decodes a single bundle; true on a logical error.
pub fn bundle_fails(strategy: Strategy, shortcuts: bool, regime: BundleRegime, level: u32, l: usize) -> Result<bool> {
    let code = CodeParams::new(2, l)?;
    let e = cantor_bundle(level, 2, regime, &code)?;
    let ds = DefectSet::from_syndrome(&syndrome_of(&e, &code));
    let out = hdrg_run(strategy, &ds, &code, shortcuts)?;
    let total = compose(&out.recovery, &e, &code);
    Ok(!logical_class(&total, &code)?.is_trivial())
}

/// Smallest odd torus on which the level-`m` bundle's wrap is shorter than
/// its direct span.
fn torus_for(regime: BundleRegime, level: u32) -> usize {
    2 * bundle_lengths(level, 2, regime)[level as usize] - 1
}

/// The expected matrix, evaluated.
pub fn cantor_suite() -> Result<Vec<CantorCell>> {
    use BundleRegime::*;
    use Strategy::*;
    let mut spec: Vec<(Strategy, bool, BundleRegime, u32, usize, bool)> = Vec::new();
    // Without shortcuts: ED and ABCB break on l_n - 1 gaps, BH on power-of-two gaps.
    for s in [Ed, Abcb] {
        spec.push((s, false, PlainEdAbcb, 3, torus_for(PlainEdAbcb, 3), true));
    }
    spec.push((Bh, false, PlainBh, 3, torus_for(PlainBh, 3), true));
    // Shortcuts repair both plain families for every strategy.
    for s in [Ed, Abcb, Bh] {
        spec.push((s, true, PlainEdAbcb, 3, torus_for(PlainEdAbcb, 3), false));
        spec.push((s, true, PlainBh, 3, torus_for(PlainBh, 3), false));
    }
    // Families built against shortcuts.
    for s in [Ed, Abcb] {
        spec.push((s, true, Shortcut, 2, 19, true));
    }
    spec.push((Bh, true, ShortcutBh, 2, 19, true));
    // Smallest breaking torus.
    for s in [Ed, Abcb, Bh] {
        spec.push((s, true, Shortcut, 1, 9, true));
    }
    spec.into_iter()
        .map(|(strategy, shortcuts, regime, level, l, expect_failure)| {
            let failed = bundle_fails(strategy, shortcuts, regime, level, l)?;
            Ok(CantorCell { strategy, shortcuts, regime, level, l, expect_failure, failed })
        })
        .collect()
}
