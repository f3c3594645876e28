//! `<outdir>/<run-name>/{report.json, curves.csv, mesh.off, meta.json}`.
//! Only `meta.json` carries run-dependent data such as timestamps.

use std::fs::{self, File};
use std::io::BufWriter;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::json;

use crate::args::Command;
use crate::commands::Outcome;
use crate::config::Common;
use crate::CliError;
use extrinsic::surfaces::write_off;

pub fn write_run(common: &Common, command: &Command, outcome: &Outcome, started: Instant) -> Result<(), CliError> {
    let dir = common.outdir.join(&common.run_name);
    fs::create_dir_all(&dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;

    let report = json!({
        "command": command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "strict": common.strict,
        "config": outcome.config,
        "results": outcome.results,
        "report": outcome.report,
    });
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;

    if let Some(curve) = &outcome.curve {
        curve.write_csv(File::create(dir.join("curves.csv"))?)?;
    } else if let Some(bytes) = &outcome.model_csv {
        fs::write(dir.join("curves.csv"), bytes)?;
    }
    if let Some(mesh) = &outcome.mesh {
        let mut out = BufWriter::new(File::create(dir.join("mesh.off"))?);
        write_off(mesh, &mut out)?;
    }

    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "argv": std::env::args().collect::<Vec<_>>(),
        "threads": rayon::current_num_threads(),
        "finished_unix_seconds": now,
        "elapsed_seconds": started.elapsed().as_secs_f64(),
    });
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}
