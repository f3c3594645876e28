use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Command, ModelArgs, ModelCmd, SurfaceArgs, TolArgs};
use crate::config::{parse_grid, FileConfig, ModelConfig, SurfaceConfig, Tolerances};
use crate::CliError;
use extrinsic::harness::{
    ends_bound, exit_time_comparison, failed_hypotheses, quotient_curves, run_suite, tone_report,
    verify_capacity_sandwich, verify_euclidean_sandwich, verify_isoperimetric, volume_flux_tail, HarnessConfig,
    Hypothesis, QuotientCurve, SuiteSpec, VerificationReport,
};
use extrinsic::modelspace::{ModelSpace, RadiusGrid};
use extrinsic::surfaces::{minimality_residual, TriMesh};

/// Everything a subcommand produces; written out by `output::write_run`.
pub struct Outcome {
    pub config: Value,
    pub results: Value,
    pub report: VerificationReport,
    pub curve: Option<QuotientCurve>,
    /// Model-only curves, already rendered as CSV.
    pub model_csv: Option<Vec<u8>>,
    pub mesh: Option<TriMesh>,
    /// Printed before the check summaries.
    pub lines: Vec<String>,
}

impl Outcome {
    fn new(config: Value) -> Self {
        Outcome {
            config,
            results: Value::Null,
            report: VerificationReport::default(),
            curve: None,
            model_csv: None,
            mesh: None,
            lines: Vec::new(),
        }
    }
}

pub fn execute(command: &Command, file: &FileConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Model(cmd) => model(cmd, file),
        Command::Surface(cmd) => {
            let surface = SurfaceConfig::resolve(&cmd.surface, file)?;
            let mesh = surface.build()?;
            let stats = json!({
                "vertices": mesh.vertex_count(),
                "triangles": mesh.triangles().len(),
                "mean_edge_length": mesh.mean_edge_length(),
                "truncation_radius": mesh.truncation_radius(),
                "max_r": mesh.max_r(),
                "pole_distance": mesh.pole_distance(),
                "minimality_residual": minimality_residual(&mesh),
                "fingerprint": format!("{:016x}", mesh.fingerprint()),
            });
            let mut out = Outcome::new(json!({ "surface": surface }));
            if let Value::Object(map) = &stats {
                out.lines = map.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            }
            out.results = stats;
            out.mesh = Some(mesh);
            Ok(out)
        }
        Command::Quotients(cmd) => {
            let mut s = Setup::new(&cmd.model, &cmd.surface, &cmd.tol, file)?;
            let grid = s.grid(cmd.grid.as_deref(), file)?;
            let curve = quotient_curves(&s.mesh, &s.model, &grid, None, &s.cfg)?;
            let gates = failed_hypotheses(
                &[Hypothesis::Minimal, Hypothesis::CurvatureBound, Hypothesis::BalancedBelow],
                &s.model,
                Some(&s.mesh),
                grid.last(),
                &s.cfg,
            )?;
            s.report.extend(verify_isoperimetric(&curve, &s.prov(), &s.cfg).into_iter().map(|c| c.gated(&gates)));
            s.report.extend([volume_flux_tail(&curve, &s.prov(), &s.cfg).gated(&gates)]);
            s.echo("grid", grid.points());
            let results = json!({ "volume_w": curve.volume_w(), "flux_w": curve.flux_w(), "tail_change": curve.tail_change() });
            Ok(s.finish(results, Some(curve)))
        }
        Command::Capacity(cmd) => {
            let mut s = Setup::new(&cmd.model, &cmd.surface, &cmd.tol, file)?;
            let (rho, big_r) = s.annulus(cmd.rho, cmd.big_r, file)?;
            let model_capacity = s.model.capacity_model(rho, big_r, &s.cfg.quadrature)?;
            s.report.extend(verify_capacity_sandwich(&s.mesh, &s.model, rho, big_r, &s.cfg)?);
            s.report.extend(verify_euclidean_sandwich(&s.mesh, rho, big_r, &s.cfg)?);
            s.echo("rho", rho);
            s.echo("R", big_r);
            Ok(s.finish(json!({ "model_capacity": model_capacity }), None))
        }
        Command::ExitTime(cmd) => {
            let mut s = Setup::new(&cmd.model, &cmd.surface, &cmd.tol, file)?;
            let (_, big_r) = s.annulus(None, cmd.big_r, file)?;
            let model_center = s.model.mean_exit_model(big_r, 0.0, &s.cfg.quadrature)?;
            s.report.extend(exit_time_comparison(&s.mesh, &s.model, big_r, &s.cfg)?);
            s.echo("R", big_r);
            Ok(s.finish(json!({ "model_exit_time_at_center": model_center }), None))
        }
        Command::Ends(cmd) => {
            let mut s = Setup::new(&cmd.model, &cmd.surface, &TolArgs::default(), file)?;
            let (big_r, t) = s.ends_radii(cmd.big_r, cmd.t, file)?;
            let ends = ends_bound(&s.mesh, &s.model, big_r, t, &s.cfg)?;
            s.report.extend(ends.checks());
            s.echo("R", big_r);
            s.echo("t", t);
            Ok(s.finish(to_value(&ends)?, None))
        }
        Command::Tone(cmd) => {
            let model_cfg = ModelConfig::resolve(&cmd.model, file)?;
            let model = model_cfg.build()?;
            let cfg = HarnessConfig::default();
            if cmd.surface.given() || file.surface.is_some() || file.mesh.is_some() {
                let mut s = Setup::new(&cmd.model, &cmd.surface, &TolArgs::default(), file)?;
                let r0 = positive("r0", cmd.r0.or(file.r0).unwrap_or_else(|| s.default_rho()))?;
                let grid = s.tone_grid(cmd.grid.as_deref(), r0, file)?;
                let tone = tone_report(Some(&s.mesh), &s.model, r0, &grid, &s.cfg)?;
                s.report.extend(tone.checks.iter().cloned());
                s.echo("r0", r0);
                s.echo("grid", grid.points());
                Ok(s.finish(to_value(&tone)?, None))
            } else {
                let r0 = positive("r0", cmd.r0.or(file.r0).unwrap_or(1.0))?;
                let grid = match cmd.grid.as_deref().or(file.tone_grid.as_deref()) {
                    Some(text) => parse_grid(text)?,
                    None => RadiusGrid::linspace(2.0 * r0, 8.0 * r0, 4)?,
                };
                let tone = tone_report(None, &model, r0, &grid, &cfg)?;
                let mut out = Outcome::new(json!({ "model": model_cfg, "r0": r0 }));
                out.report.extend(tone.checks.iter().cloned());
                out.lines = vec![
                    format!("tone upper bound = {}", tone.upper_bound),
                    format!("tone lower bound = {}", tone.lower_bound),
                ];
                out.results = to_value(&tone)?;
                Ok(out)
            }
        }
        Command::Verify(cmd) => {
            let mut s = Setup::new(&cmd.model, &cmd.surface, &cmd.tol, file)?;
            let grid = s.grid(cmd.grid.as_deref(), file)?;
            let (rho, big_r) = s.annulus(cmd.rho, cmd.big_r, file)?;
            let ends_r = positive("ends-r", cmd.ends_r.or(file.ends_r).unwrap_or(rho))?;
            let ends_t = positive("t", cmd.t.or(file.t).unwrap_or(grid.last()))?;
            let tone_grid = s.tone_grid(cmd.tone_grid.as_deref(), ends_r, file)?;
            let spec = SuiteSpec { grid: grid.clone(), rho, big_r, ends_r, ends_t, tone_grid: tone_grid.clone() };
            let suite = run_suite(&s.mesh, &s.model, &spec, &s.cfg)?;
            s.report = suite.report.clone();
            s.echo("grid", grid.points());
            s.echo("rho", rho);
            s.echo("R", big_r);
            s.echo("ends_r", ends_r);
            s.echo("t", ends_t);
            s.echo("tone_grid", tone_grid.points());
            let results = json!({ "ends": suite.ends, "tone": suite.tone });
            Ok(s.finish(results, Some(suite.curve)))
        }
    }
}

fn to_value(v: &impl Serialize) -> Result<Value, CliError> {
    Ok(serde_json::to_value(v)?)
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Model, mesh and tolerances shared by the mesh-based subcommands.
struct Setup {
    model: ModelSpace,
    mesh: TriMesh,
    cfg: HarnessConfig,
    config: serde_json::Map<String, Value>,
    report: VerificationReport,
}

impl Setup {
    fn new(model: &ModelArgs, surface: &SurfaceArgs, tol: &TolArgs, file: &FileConfig) -> Result<Self, CliError> {
        let model_cfg = ModelConfig::resolve(model, file)?;
        if model_cfg.dim != 2 {
            return Err(CliError::Usage(format!("surfaces need a model of dimension 2, got {}", model_cfg.dim)));
        }
        let surface_cfg = SurfaceConfig::resolve(surface, file)?;
        let tolerances = Tolerances::resolve(tol, file)?;
        let model = model_cfg.build()?;
        let mesh = surface_cfg.build()?;
        let mut config = serde_json::Map::new();
        config.insert("model".into(), serde_json::to_value(&model_cfg)?);
        config.insert("surface".into(), serde_json::to_value(&surface_cfg)?);
        config.insert("tolerances".into(), serde_json::to_value(&tolerances)?);
        Ok(Setup { model, mesh, cfg: tolerances.harness(), config, report: VerificationReport::default() })
    }

    fn prov(&self) -> extrinsic::harness::Provenance {
        extrinsic::harness::Provenance::new(Some(&self.mesh), Some(&self.model), &self.cfg)
    }

    fn echo(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    fn finish(self, results: Value, curve: Option<QuotientCurve>) -> Outcome {
        let mut out = Outcome::new(Value::Object(self.config));
        out.results = results;
        out.report = self.report;
        out.curve = curve;
        out.mesh = Some(self.mesh);
        out
    }

    fn reach(&self) -> f64 {
        self.mesh.truncation_radius()
    }

    fn default_big_r(&self) -> f64 {
        6f64.min(0.5 * self.reach())
    }

    fn default_rho(&self) -> f64 {
        1.5f64.min(0.25 * self.default_big_r())
    }

    /// Default quotient grid: 40 radii up to three quarters of the mesh reach.
    fn grid(&self, flag: Option<&str>, file: &FileConfig) -> Result<RadiusGrid, CliError> {
        match flag.or(file.grid.as_deref()) {
            Some(text) => parse_grid(text),
            None => {
                let end = 0.75 * self.reach();
                Ok(RadiusGrid::linspace(0.5f64.min(0.1 * end), end, 40)?)
            }
        }
    }

    fn annulus(&self, rho: Option<f64>, big_r: Option<f64>, file: &FileConfig) -> Result<(f64, f64), CliError> {
        let big_r = positive("R", big_r.or(file.big_r).unwrap_or_else(|| self.default_big_r()))?;
        let rho = positive("rho", rho.or(file.rho).unwrap_or_else(|| self.default_rho().min(0.25 * big_r)))?;
        if rho >= big_r {
            return Err(CliError::Usage(format!("rho = {rho} must be below R = {big_r}")));
        }
        Ok((rho, big_r))
    }

    fn ends_radii(&self, big_r: Option<f64>, t: Option<f64>, file: &FileConfig) -> Result<(f64, f64), CliError> {
        let big_r = positive("R", big_r.or(file.ends_r).unwrap_or_else(|| self.default_rho()))?;
        let t = positive("t", t.or(file.t).unwrap_or(0.75 * self.reach()))?;
        if t <= big_r {
            return Err(CliError::Usage(format!("t = {t} must exceed R = {big_r}")));
        }
        Ok((big_r, t))
    }

    /// Default eigenvalue radii: six points from `2 r0` to three quarters of the reach.
    fn tone_grid(&self, flag: Option<&str>, r0: f64, file: &FileConfig) -> Result<RadiusGrid, CliError> {
        match flag.or(file.tone_grid.as_deref()) {
            Some(text) => parse_grid(text),
            None => {
                let end = 0.75 * self.reach();
                if end <= 2.0 * r0 {
                    return Err(CliError::Usage(format!("mesh reach {end} too small for ends outside r0 = {r0}")));
                }
                Ok(RadiusGrid::linspace(2.0 * r0, end, 6)?)
            }
        }
    }
}

fn model(cmd: &ModelCmd, file: &FileConfig) -> Result<Outcome, CliError> {
    let model_cfg = ModelConfig::resolve(&cmd.model, file)?;
    let model = model_cfg.build()?;
    let q = HarnessConfig::default().quadrature;
    let grid = match cmd.grid.as_deref().or(file.grid.as_deref()) {
        Some(text) => parse_grid(text)?,
        None => HarnessConfig::default().model_grid,
    };
    let mut results = serde_json::Map::new();
    let mut lines = vec![format!("model dim={} warp={}", model.dim(), model.warp())];
    let mut put = |key: String, value: Value, lines: &mut Vec<String>| {
        lines.push(format!("{key} = {value}"));
        results.insert(key, value);
    };

    if let Some(text) = &cmd.capacity {
        let (rho, big_r) = text
            .split_once(':')
            .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
            .ok_or_else(|| CliError::Usage(format!("--capacity expects rho:R, got `{text}`")))?;
        let cap = model.capacity_model(rho, big_r, &q).map_err(|e| CliError::Usage(e.to_string()))?;
        put(format!("capacity({rho}, {big_r})"), json!(cap), &mut lines);
    }
    if let Some(r) = cmd.vol_ball {
        put(format!("vol_ball({r})"), json!(model.vol_ball(r, &q).map_err(|e| CliError::Usage(e.to_string()))?), &mut lines);
    }
    if let Some(r) = cmd.vol_sphere {
        put(format!("vol_sphere({r})"), json!(model.vol_sphere(r).map_err(|e| CliError::Usage(e.to_string()))?), &mut lines);
    }
    if let Some(r) = cmd.exit {
        let e = model.mean_exit_model(r, 0.0, &q).map_err(|e| CliError::Usage(e.to_string()))?;
        put(format!("exit_time({r})"), json!(e), &mut lines);
    }
    let nothing_selected = cmd.capacity.is_none()
        && cmd.vol_ball.is_none()
        && cmd.vol_sphere.is_none()
        && cmd.exit.is_none()
        && !(cmd.balance || cmd.parabolicity || cmd.tone || cmd.ends_coefficient || cmd.curvature);
    if cmd.balance || nothing_selected {
        put("balance".into(), to_value(&model.balance_check(&grid, &q)?)?, &mut lines);
    }
    if cmd.parabolicity || nothing_selected {
        put("parabolicity".into(), to_value(&model.parabolicity_test(&q)?)?, &mut lines);
    }
    if cmd.tone {
        let limit = model.tone_upper_limit(&grid, &q)?;
        put("tone_upper_limit".into(), json!({ "value": limit.reported_limsup, "trend": limit.trend }), &mut lines);
        put("cheeger_bound".into(), to_value(&model.cheeger_bound(&grid, &q)?)?, &mut lines);
    }
    if cmd.ends_coefficient {
        let c = model.ends_coefficient(&grid, &q)?;
        put("ends_coefficient".into(), json!({ "value": c.reported_limsup, "trend": c.trend }), &mut lines);
    }

    if cmd.curvature {
        put("max_radial_curvature".into(), json!(model.max_radial_curvature(&grid)?), &mut lines);
        put("max_tangential_curvature".into(), json!(model.max_tangential_curvature(&grid)?), &mut lines);
    }

    let mut out = Outcome::new(json!({ "model": model_cfg, "grid": grid.points() }));
    out.model_csv = Some(model_curves(&model, &grid)?);
    out.results = Value::Object(results);
    out.lines = lines;
    Ok(out)
}

fn model_curves(model: &ModelSpace, grid: &RadiusGrid) -> Result<Vec<u8>, CliError> {
    let q = HarnessConfig::default().quadrature;
    let m = model.dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "radius [length]".to_string(),
        "eta [1/length]".to_string(),
        format!("vol_sphere [length^{}]", m - 1),
        format!("vol_ball [length^{m}]"),
        "iso_quotient [length]".to_string(),
    ])?;
    for &r in grid.points() {
        w.write_record([
            r.to_string(),
            model.eta(r)?.to_string(),
            model.vol_sphere(r)?.to_string(),
            model.vol_ball(r, &q)?.to_string(),
            model.iso_quotient(r, &q)?.to_string(),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
}
