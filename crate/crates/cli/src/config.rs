//! Resolution of flags, environment, config file and defaults into one
//! `RunConfig`. Clap already merges flags over environment variables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::{GlobalArgs, ModelArgs, SurfaceArgs, TolArgs};
use crate::CliError;
use extrinsic::harness::HarnessConfig;
use extrinsic::modelspace::{ModelSpace, RadiusGrid, WarpingSpec};
use extrinsic::surfaces::{builtin, load_mesh, tessellate_about, MeshFormat, TriMesh};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileTolerances {
    pub iso: Option<f64>,
    pub mono_slack: Option<f64>,
    pub capacity: Option<f64>,
    pub exit: Option<f64>,
    pub tail: Option<f64>,
}

/// Contents of a `--config` file; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dim: Option<usize>,
    pub warp: Option<String>,
    pub surface: Option<String>,
    pub mesh: Option<PathBuf>,
    pub pole: Option<[f64; 3]>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub res: Option<usize>,
    pub nu: Option<usize>,
    pub nv: Option<usize>,
    pub grid: Option<String>,
    pub rho: Option<f64>,
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    pub t: Option<f64>,
    pub ends_r: Option<f64>,
    pub r0: Option<f64>,
    pub tone_grid: Option<String>,
    #[serde(default)]
    pub tolerances: FileTolerances,
    pub outdir: Option<PathBuf>,
    pub run_name: Option<String>,
    pub threads: Option<usize>,
    pub strict: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Common {
    pub outdir: PathBuf,
    pub run_name: String,
    pub strict: bool,
    #[serde(skip)]
    pub threads: Option<usize>,
}

pub fn common(global: &GlobalArgs, file: &FileConfig, command: &str) -> Common {
    Common {
        outdir: global.outdir.clone().or_else(|| file.outdir.clone()).unwrap_or_else(|| PathBuf::from("out")),
        run_name: global.run_name.clone().or_else(|| file.run_name.clone()).unwrap_or_else(|| command.to_string()),
        strict: global.strict || file.strict.unwrap_or(false),
        threads: global.threads.or(file.threads),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelConfig {
    pub dim: usize,
    pub warp: String,
}

impl ModelConfig {
    pub fn resolve(args: &ModelArgs, file: &FileConfig) -> Result<Self, CliError> {
        let (mut dim, mut warp) = (None, None);
        if let Some(spec) = &args.model {
            for (key, value) in split_pairs(spec)? {
                match key.as_str() {
                    "dim" => {
                        dim = Some(value.parse().map_err(|_| CliError::Usage(format!("bad dimension `{value}`")))?)
                    }
                    "warp" => warp = Some(value),
                    _ => return Err(CliError::Usage(format!("unknown model key `{key}`"))),
                }
            }
        }
        Ok(ModelConfig {
            dim: args.dim.or(dim).or(file.dim).unwrap_or(2),
            warp: args.warp.clone().or(warp).or_else(|| file.warp.clone()).unwrap_or_else(|| "r".into()),
        })
    }

    pub fn build(&self) -> Result<ModelSpace, CliError> {
        let warp = WarpingSpec::parse(&self.warp).map_err(|e| CliError::Usage(format!("--warp: {e}")))?;
        ModelSpace::new(self.dim, warp).map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Splits `k=v,k=v`; a comma only separates pairs when followed by `key=`, so
/// warp expressions may contain commas.
fn split_pairs(spec: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut parts: Vec<String> = Vec::new();
    for piece in spec.split(',') {
        let starts_pair = piece.split_once('=').is_some_and(|(k, _)| {
            let k = k.trim();
            !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        });
        match parts.last_mut() {
            Some(last) if !starts_pair => {
                last.push(',');
                last.push_str(piece);
            }
            _ => parts.push(piece.to_string()),
        }
    }
    parts
        .into_iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().trim_matches('"').to_string()))
                .ok_or_else(|| CliError::Usage(format!("expected key=value, got `{p}`")))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceSource {
    Builtin { name: String, params: BTreeMap<String, f64>, nu: usize, nv: usize },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceConfig {
    pub source: SurfaceSource,
    pub pole: [f64; 3],
}

impl SurfaceConfig {
    pub fn resolve(args: &SurfaceArgs, file: &FileConfig) -> Result<Self, CliError> {
        let pole = match &args.pole {
            Some(text) => parse_triple(text)?,
            None => file.pole.unwrap_or([0.0; 3]),
        };
        if let Some(path) = args.mesh.clone().or_else(|| if args.surface.is_none() { file.mesh.clone() } else { None }) {
            if !path.exists() {
                return Err(CliError::Usage(format!("mesh file {} does not exist", path.display())));
            }
            return Ok(SurfaceConfig { source: SurfaceSource::File { path }, pole });
        }
        let name = args
            .surface
            .clone()
            .or_else(|| file.surface.clone())
            .ok_or_else(|| CliError::Usage("one of --surface or --mesh is required".into()))?;
        let mut params = file.params.clone();
        for p in &args.params {
            let (k, v) = p.split_once('=').ok_or_else(|| CliError::Usage(format!("--param expects key=value, got `{p}`")))?;
            let v: f64 = v.trim().parse().map_err(|_| CliError::Usage(format!("bad value in --param {p}")))?;
            params.insert(k.trim().to_string(), v);
        }
        for (key, value) in [("a", args.a), ("c", args.c), ("half", args.half), ("umax", args.umax), ("vmax", args.vmax)] {
            if let Some(v) = value {
                params.insert(key.into(), v);
            }
        }
        let res = args.res.or(file.res).unwrap_or(128);
        let nu = args.nu.or(file.nu).unwrap_or(res);
        let nv = args.nv.or(file.nv).unwrap_or(res);
        Ok(SurfaceConfig { source: SurfaceSource::Builtin { name, params, nu, nv }, pole })
    }

    pub fn build(&self) -> Result<TriMesh, CliError> {
        match &self.source {
            SurfaceSource::Builtin { name, params, nu, nv } => {
                let s = builtin(name, params).map_err(|e| CliError::Usage(e.to_string()))?;
                tessellate_about(&s, *nu, *nv, &[], self.pole).map_err(|e| CliError::Compute(e.into()))
            }
            SurfaceSource::File { path } => {
                let format = MeshFormat::from_path(path)
                    .ok_or_else(|| CliError::Usage(format!("{}: expected a .off or .obj file", path.display())))?;
                load_mesh(path, format, self.pole).map_err(|e| CliError::Compute(e.into()))
            }
        }
    }
}

fn parse_triple(text: &str) -> Result<[f64; 3], CliError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--pole expects x,y,z, got `{text}`")))?;
    v.try_into().map_err(|_| CliError::Usage(format!("--pole expects three coordinates, got `{text}`")))
}

pub fn parse_grid(text: &str) -> Result<RadiusGrid, CliError> {
    RadiusGrid::parse(text).map_err(|e| CliError::Usage(format!("grid `{text}`: {e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub iso: f64,
    pub mono_slack: f64,
    pub capacity: f64,
    pub exit: f64,
    pub tail: f64,
}

impl Tolerances {
    pub fn resolve(args: &TolArgs, file: &FileConfig) -> Result<Self, CliError> {
        let d = HarnessConfig::default();
        let t = &file.tolerances;
        let out = Tolerances {
            iso: args.tol_iso.or(t.iso).unwrap_or(d.iso_tol),
            mono_slack: args.mono_slack.or(t.mono_slack).unwrap_or(d.mono_slack),
            capacity: args.tol_capacity.or(t.capacity).unwrap_or(d.capacity_tol),
            exit: args.tol_exit.or(t.exit).unwrap_or(d.exit_tol),
            tail: args.tol_tail.or(t.tail).unwrap_or(d.tail_tol),
        };
        if [out.iso, out.mono_slack, out.capacity, out.exit, out.tail].iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(CliError::Usage("tolerances must be finite and nonnegative".into()));
        }
        Ok(out)
    }

    pub fn harness(&self) -> HarnessConfig {
        HarnessConfig {
            iso_tol: self.iso,
            mono_slack: self.mono_slack,
            capacity_tol: self.capacity,
            exit_tol: self.exit,
            tail_tol: self.tail,
            ..HarnessConfig::default()
        }
    }
}
