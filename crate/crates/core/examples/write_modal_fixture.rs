//! Regenerates the 12-state modal fixture shipped with the command-line tool.
//!
//! ```text
//! cargo run -p vsbi-core --example write_modal_fixture [PATH]
//! ```

use std::path::PathBuf;

use vsbi_core::modal::{synthetic_fixture, write_bundle};

fn main() -> vsbi_core::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/fixtures/modal_fixture.bundle"));
    let (model, spectrum) = synthetic_fixture()?;
    write_bundle(&model, &path)?;
    println!(
        "wrote {} ({} states, weak mode {:.3}{:+.3}j at {:.4} % damping)",
        path.display(),
        model.n_states(),
        spectrum.weak_mode.re,
        spectrum.weak_mode.im,
        spectrum.weak_damping_pct
    );
    Ok(())
}
