//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::{json, Value};

use crate::conemaps::{
    dilate_by_function, distance3, rect_isotopy, translate_along_arc, verify_bilipschitz, ConeModel, Direction, FamilyFn,
    IsotopyFamilies, LipschitzVerdict,
};
use crate::fuzz;
use crate::germ::{format_germ, parse_germ, validated_grid, ArcGerm, GermError, GridConfig, PolygonalGerm, Rotation};
use crate::linktopo::{decide_equivalence, extended_tree, LinkTopoError};
use crate::metric::{edge_exponents, is_lne, vertex_tord_table, LneStatus, LneVerdict, MetricError, WitnessKind};
use crate::puiseux::{q_from_f64, qf, PuiseuxSeries, Q};
use crate::reduce::{classify_connected_with, ReduceConfig, ReduceError, ReductionTrace};
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_LNE: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "lipgerm", version, about = "Lipschitz geometry of polygonal surface germs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Largest sampled link parameter.
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Number of halvings in sampling grids.
    #[arg(long, global = true, default_value_t = 15)]
    pub grid_depth: u32,
    /// Default truncation order of series without an explicit `O(...)`.
    #[arg(long, global = true, default_value = "12")]
    pub truncation: String,
    /// Directory for SVG snapshots.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// RNG seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    Translate,
    Dilate,
    Isotopy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FuzzKind {
    Closed,
    Open,
    Mixed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a germ file and check its plane links.
    Validate { file: PathBuf },
    /// Edge exponents, tangency orders and the LNE verdict.
    Invariants { file: PathBuf },
    /// Run the reduction pipeline and write its trace.
    Reduce {
        file: PathBuf,
        /// Trace output file; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Link parameter of SVG snapshots.
        #[arg(long)]
        at: Option<f64>,
    },
    /// Canonical form of a connected germ.
    Classify { file: PathBuf },
    /// Ambient equivalence of two germs.
    Compare { first: PathBuf, second: PathBuf },
    /// Extended canonical tree in bracket encoding.
    Tree { file: PathBuf },
    /// Sampled bi-Lipschitz check of an ambient map.
    VerifyMap {
        file: PathBuf,
        #[arg(long, value_enum)]
        map: MapKind,
        /// Vertex `component:index` whose arc drives a translation.
        #[arg(long, default_value = "0:1")]
        vertex: String,
        /// Dilatation factor series.
        #[arg(long, default_value = "3/2 - t")]
        factor: String,
        /// Sample pairs per grid point.
        #[arg(long, default_value_t = 400)]
        pairs: usize,
    },
    /// SVG snapshots of the plane link and of reduction steps.
    Render {
        file: PathBuf,
        #[arg(long)]
        at: Option<f64>,
    },
    /// Random LNE germs.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_enum, default_value = "mixed")]
        kind: FuzzKind,
        /// Vertex count; random in 3..=10 when absent.
        #[arg(long)]
        vertices: Option<usize>,
        /// Output directory; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

/// A failed command: exit code and message.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn invalid(m: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: m.into() }
    }
}

impl From<GermError> for CliError {
    fn from(e: GermError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Germ(g) => g.into(),
            e => CliError { code: EXIT_CERTIFICATE, message: e.to_string() },
        }
    }
}

impl From<ReduceError> for CliError {
    fn from(e: ReduceError) -> Self {
        match e {
            ReduceError::NotLneInput(_) => CliError { code: EXIT_NOT_LNE, message: e.to_string() },
            ReduceError::PreconditionFailed(_) => CliError::invalid(e.to_string()),
            ReduceError::Germ(g) => g.into(),
            ReduceError::Metric(m) => m.into(),
            e => CliError { code: EXIT_CERTIFICATE, message: e.to_string() },
        }
    }
}

impl From<LinkTopoError> for CliError {
    fn from(e: LinkTopoError) -> Self {
        match e {
            LinkTopoError::NotLneInput(_) => CliError { code: EXIT_NOT_LNE, message: e.to_string() },
            LinkTopoError::HasOpenComponents | LinkTopoError::NotDisjoint => CliError::invalid(e.to_string()),
            LinkTopoError::Germ(g) => g.into(),
            LinkTopoError::Metric(m) => m.into(),
            e => CliError { code: EXIT_CERTIFICATE, message: e.to_string() },
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::invalid(format!("{}: {}", path.display(), e))
}

struct Ctx {
    common: Common,
    truncation: Q,
}

impl Ctx {
    fn load(&self, path: &Path) -> Result<PolygonalGerm, CliError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Ok(parse_germ(&text, &self.truncation)?)
    }

    fn grid_config(&self) -> GridConfig {
        GridConfig { t_max: self.common.tmax, depth: self.common.grid_depth }
    }

    fn reduce_config(&self, g: &PolygonalGerm) -> Result<ReduceConfig, CliError> {
        Ok(match self.common.tmax {
            Some(t) => ReduceConfig::with_t_max(t),
            None => ReduceConfig::for_germ(g)?,
        })
    }

    /// `tmax 2^-j`, defaulting to `2^-5 .. 2^-20`.
    fn map_grid(&self) -> Vec<f64> {
        GridConfig::grid_from(self.common.tmax.unwrap_or(0.5f64.powi(5)), self.common.grid_depth)
    }

    fn svg_dir(&self) -> Result<Option<&Path>, CliError> {
        match &self.common.svg {
            Some(d) => {
                fs::create_dir_all(d).map_err(|e| io_err(d, e))?;
                Ok(Some(d.as_path()))
            }
            None => Ok(None),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Parses arguments and runs; returns the exit code after printing.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Runs one command and returns its standard output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let truncation: Q =
        cli.common.truncation.parse().map_err(|_| CliError::invalid(format!("bad truncation `{}`", cli.common.truncation)))?;
    let ctx = Ctx { common: cli.common.clone(), truncation };
    match &cli.command {
        Command::Validate { file } => validate(&ctx, file),
        Command::Invariants { file } => invariants(&ctx, file),
        Command::Reduce { file, out, at } => reduce(&ctx, file, out.as_deref(), *at),
        Command::Classify { file } => classify(&ctx, file),
        Command::Compare { first, second } => compare(&ctx, first, second),
        Command::Tree { file } => tree(&ctx, file),
        Command::VerifyMap { file, map, vertex, factor, pairs } => verify_map(&ctx, file, *map, vertex, factor, *pairs),
        Command::Render { file, at } => render(&ctx, file, *at),
        Command::Fuzz { count, kind, vertices, out } => fuzz_cmd(&ctx, *count, *kind, *vertices, out.as_deref()),
    }
}

fn json_out(v: Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
}

fn validate(ctx: &Ctx, file: &Path) -> Result<String, CliError> {
    let g = ctx.load(file)?;
    let grid = validated_grid(&g, &ctx.grid_config())?;
    if ctx.common.json {
        return Ok(json_out(json!({
            "valid": true,
            "components": g.components.len(),
            "vertices": g.vertex_count(),
            "t_max": grid[0],
            "grid_points": grid.len(),
        })));
    }
    Ok(format!(
        "valid: {} components, {} vertices, links simple for t = {:e} .. {:e}\n",
        g.components.len(),
        g.vertex_count(),
        grid[0],
        grid[grid.len() - 1]
    ))
}

fn witness_json(v: &LneVerdict) -> Value {
    match &v.witness {
        None => Value::Null,
        Some(w) => {
            let at = match &w.kind {
                WitnessKind::Vertices { a, b } => json!({"nodes": [a, b]}),
                WitnessKind::EdgePoint { from, u, to } => json!({"edge": from, "u": u.to_string(), "nearest_edge": to}),
            };
            json!({"at": at, "outer": w.outer.to_string(), "inner": w.inner.to_string()})
        }
    }
}

fn invariants(ctx: &Ctx, file: &Path) -> Result<String, CliError> {
    let g = ctx.load(file)?;
    validated_grid(&g, &GridConfig::default())?;
    let exps = edge_exponents(&g)?;
    let lne = is_lne(&g)?;
    let mut comps = Vec::new();
    for (ci, c) in g.components.iter().enumerate() {
        let table = vertex_tord_table(&g, ci)?;
        comps.push(json!({
            "closed": c.closed,
            "vertices": c.len(),
            "edge_exponents": exps[ci].iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "tord": table.iter().map(|r| r.iter().map(|x| x.exponent().map_or("inf".to_string(), |e| e.to_string())).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }));
    }
    let report = json!({
        "components": comps,
        "lne": {
            "status": lne.status.to_string(),
            "witness": witness_json(&lne),
            "constants": lne.constant_estimates.iter().map(|(t, c)| json!([t, c])).collect::<Vec<_>>(),
        },
    });
    if ctx.common.json {
        return Ok(json_out(report));
    }
    let mut s = String::new();
    for (ci, c) in g.components.iter().enumerate() {
        let kind = if c.closed { "closed" } else { "open" };
        let e: Vec<String> = exps[ci].iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "component {} ({}, {} vertices)", ci, kind, c.len());
        let _ = writeln!(s, "  edge exponents: {}", e.join(" "));
        let _ = writeln!(s, "  tord table:");
        for row in vertex_tord_table(&g, ci)? {
            let r: Vec<String> = row.iter().map(|x| x.exponent().map_or("inf".to_string(), |e| e.to_string())).collect();
            let _ = writeln!(s, "    {}", r.join(" "));
        }
    }
    let _ = writeln!(s, "lne: {}", lne.status);
    if let Some(w) = &lne.witness {
        let _ = writeln!(s, "  witness: {:?}, outer exponent {}, inner exponent {}", w.kind, w.outer, w.inner);
    }
    let consts: Vec<String> = lne.constant_estimates.iter().map(|(t, c)| format!("{:e}:{:.4}", t, c)).collect();
    let _ = writeln!(s, "  constants: {}", consts.join(" "));
    Ok(s)
}

fn classify_germ(ctx: &Ctx, g: &PolygonalGerm) -> Result<ReductionTrace, CliError> {
    validated_grid(g, &GridConfig::default())?;
    let cfg = ctx.reduce_config(g)?;
    Ok(classify_connected_with(g, &cfg)?.1)
}

fn snapshot_t(ctx: &Ctx, g: &PolygonalGerm, at: Option<f64>) -> Result<f64, CliError> {
    match at {
        Some(t) if t > 0.0 => Ok(t),
        Some(t) => Err(CliError::invalid(format!("snapshot t = {} must be positive", t))),
        None => Ok(ctx.reduce_config(g)?.grid[0]),
    }
}

fn write_steps(dir: &Path, trace: &ReductionTrace, t: f64) -> Result<usize, CliError> {
    let states = trace.states();
    for (k, s) in states.iter().enumerate() {
        let title = if k == 0 { "initial".to_string() } else { format!("after move {} {}", k, trace.moves[k - 1].kind.name()) };
        write_file(&dir.join(format!("step-{:03}.svg", k)), &svg::render_components(std::slice::from_ref(s), t, &title))?;
    }
    Ok(states.len())
}

fn reduce(ctx: &Ctx, file: &Path, out: Option<&Path>, at: Option<f64>) -> Result<String, CliError> {
    let g = ctx.load(file)?;
    let trace = classify_germ(ctx, &g)?;
    if let Some(dir) = ctx.svg_dir()? {
        write_steps(dir, &trace, snapshot_t(ctx, &g, at)?)?;
    }
    let text = trace.to_text();
    match out {
        Some(p) => {
            write_file(p, &text)?;
            Ok(format!("{}\n", trace.form))
        }
        None => Ok(text),
    }
}

fn classify(ctx: &Ctx, file: &Path) -> Result<String, CliError> {
    let g = ctx.load(file)?;
    let trace = classify_germ(ctx, &g)?;
    if ctx.common.json {
        return Ok(json_out(json!({
            "form": trace.form.to_string(),
            "moves": trace.moves.len(),
            "circumradius_exponent": trace.circumradius_exponent.as_ref().map(|q| q.to_string()),
        })));
    }
    Ok(format!("{}\n", trace.form))
}

fn compare(ctx: &Ctx, first: &Path, second: &Path) -> Result<String, CliError> {
    let (x, y) = (ctx.load(first)?, ctx.load(second)?);
    validated_grid(&x, &GridConfig::default())?;
    validated_grid(&y, &GridConfig::default())?;
    let v = decide_equivalence(&x, &y)?;
    if ctx.common.json {
        return Ok(json_out(json!({"verdict": v.status.to_string(), "witness": v.witness})));
    }
    let mut s = format!("verdict: {}\n", v.status);
    if let Some(w) = &v.witness {
        let _ = writeln!(s, "witness: {}", w);
    }
    Ok(s)
}

fn tree(ctx: &Ctx, file: &Path) -> Result<String, CliError> {
    let g = ctx.load(file)?;
    validated_grid(&g, &GridConfig::default())?;
    if is_lne(&g)?.status == LneStatus::NotLne {
        return Err(CliError { code: EXIT_NOT_LNE, message: "NotLNEInput: germ is not LNE".into() });
    }
    let t = extended_tree(&g)?;
    if ctx.common.json {
        let labels: Vec<String> = t.labels.iter().map(|l| l.to_string()).collect();
        return Ok(json_out(json!({"encoding": t.canonical_encoding(), "labels": labels, "edges": t.edges})));
    }
    Ok(format!("{}\n", t.canonical_encoding()))
}

fn parse_vertex(g: &PolygonalGerm, spec: &str) -> Result<ArcGerm, CliError> {
    let bad = || CliError::invalid(format!("bad vertex `{}`; expected component:index", spec));
    let (c, i) = spec.split_once(':').ok_or_else(bad)?;
    let (c, i): (usize, usize) = (c.trim().parse().map_err(|_| bad())?, i.trim().parse().map_err(|_| bad())?);
    g.components.get(c).and_then(|comp| comp.vertices.get(i)).cloned().ok_or_else(bad)
}

fn map_checks<F>(model: &ConeModel, grid: &[f64], seed: u64, map: F) -> Result<(String, f64), CliError>
where
    F: Fn([f64; 3], Direction) -> Option<[f64; 3]>,
{
    let mut rng = fuzz::rng(seed);
    let mut boundary_moved = 0;
    for k in 0..64 {
        let t = grid[k % grid.len()];
        let th = rng.gen::<f64>() * std::f64::consts::TAU;
        let p = [model.a * t * th.cos(), model.a * t * th.sin(), t];
        if map(p, Direction::Forward) != Some(p) {
            boundary_moved += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let t = grid[rng.gen_range(0..grid.len())];
        let p = model.sample(t, &mut rng);
        let back = map(p, Direction::Forward).and_then(|q| map(q, Direction::Inverse));
        worst = worst.max(back.map_or(f64::INFINITY, |b| distance3(b, p)));
    }
    let mut s = String::new();
    let _ = writeln!(s, "cone: a = {}", model.a);
    let _ = writeln!(s, "boundary points moved: {} of 64", boundary_moved);
    let _ = writeln!(s, "round trip max error: {:e}", worst);
    let bad = if boundary_moved > 0 || worst > 1e-9 { 1.0 } else { 0.0 };
    Ok((s, bad))
}

fn isotopy_report(ctx: &Ctx, g: &PolygonalGerm) -> Result<String, CliError> {
    let c = g.components.iter().find(|c| !c.closed).ok_or_else(|| CliError::invalid("isotopy needs an open component"))?;
    let (first, last) = (&c.vertices[0], &c.vertices[c.len() - 1]);
    let dir = last.sub(first).leading_vector().ok_or_else(|| CliError::invalid("chain ends coincide"))?;
    let rot = Rotation::aligning(qf(&dir.0), qf(&dir.1));
    let chain: Vec<ArcGerm> = c.vertices.iter().map(|v| v.sub(first).rotated(&rot)).collect();
    let grid = ctx.map_grid();
    let monotone = grid.iter().all(|&t| chain.windows(2).all(|w| w[1].eval(t)[0] > w[0].eval(t)[0]));
    if !monotone {
        return Err(CliError::invalid("isotopy needs a chain that is a graph over its secant"));
    }
    let secant = vec![chain[0].clone(), chain[chain.len() - 1].clone()];
    let e = c.edges().iter().filter_map(|&(i, j)| c.vertices[i].sub(&c.vertices[j]).leading_exponent()).min().unwrap();
    let sec_fn = FamilyFn::Chain(secant.clone());
    let mut dev: f64 = 0.0;
    for &t in &grid {
        for v in &chain {
            let p = v.eval(t);
            dev = dev.max((p[1] - sec_fn.eval(t, p[0])).abs() / t.powf(qf(&e)));
        }
    }
    let d = q_from_f64(2.0 * dev + 1.0, 1024);
    let k = g.truncation();
    let shift = |sign: i64| -> FamilyFn {
        let off = ArcGerm::raw(PuiseuxSeries::zero(k.clone()), PuiseuxSeries::monomial(&d * Q::from_integer(sign.into()), e.clone(), k.clone()));
        FamilyFn::Chain(chain.iter().map(|v| v.add(&off)).collect())
    };
    let fam = IsotopyFamilies {
        x0: chain[0].x.clone(),
        x1: chain[chain.len() - 1].x.clone(),
        f: shift(1),
        a: FamilyFn::Chain(chain.clone()),
        b: sec_fn,
        g: shift(-1),
        m: 4.0,
    };
    let (mut id_ok, mut ends_ok, mut err) = (true, true, 0.0f64);
    for &t in &grid {
        for iu in 1..20 {
            let u = iu as f64 / 20.0;
            for iv in 0..=10 {
                let v = iv as f64 / 10.0;
                id_ok &= rect_isotopy(&fam, u, v, t, 0.0).map_err(|x| CliError { code: EXIT_CERTIFICATE, message: x.to_string() })? == fam.point(u, v, t);
            }
            for tau in [0.25, 0.5, 1.0] {
                for v in [0.0, 1.0] {
                    ends_ok &= rect_isotopy(&fam, u, v, t, tau).ok() == Some(fam.point(u, v, t));
                }
            }
            let (al, _) = fam.ratios(u, t).map_err(|x| CliError { code: EXIT_CERTIFICATE, message: x.to_string() })?;
            let img = rect_isotopy(&fam, u, al, t, 1.0).map_err(|x| CliError { code: EXIT_CERTIFICATE, message: x.to_string() })?;
            err = err.max((img[1] - fam.b.eval(t, img[0])).abs());
        }
    }
    let mut s = String::from("map: isotopy (chain onto its secant)\n");
    let _ = writeln!(s, "phi_0 identity: {}", if id_ok { "ok" } else { "FAILED" });
    let _ = writeln!(s, "v in {{0, 1}} fixed: {}", if ends_ok { "ok" } else { "FAILED" });
    let _ = writeln!(s, "phi_1 onto secant link: max error {:e}", err);
    if !(id_ok && ends_ok && err <= 1e-9) {
        return Err(CliError { code: EXIT_CERTIFICATE, message: s });
    }
    Ok(s)
}

fn verify_map(ctx: &Ctx, file: &Path, map: MapKind, vertex: &str, factor: &str, pairs: usize) -> Result<String, CliError> {
    let g = ctx.load(file)?;
    let grid = ctx.map_grid();
    let (mut s, bad, report) = match map {
        MapKind::Isotopy => return isotopy_report(ctx, &g),
        MapKind::Translate => {
            let gamma = parse_vertex(&g, vertex)?;
            let model = ConeModel::for_translation(g.cone_a.max(1.0), &gamma, &grid);
            let f = |p, d| translate_along_arc(p, &gamma, &model, d).ok();
            let (s, bad) = map_checks(&model, &grid, ctx.common.seed, f)?;
            let r = verify_bilipschitz(|p| f(p, Direction::Forward), |t, rng: &mut _| model.sample(t, rng), &grid, pairs, ctx.common.seed);
            (format!("map: translate along {}\n{}", gamma.to_line(), s), bad, r)
        }
        MapKind::Dilate => {
            let f = PuiseuxSeries::parse_with(factor, &ctx.truncation).map_err(|e| CliError::invalid(e.to_string()))?;
            let model = ConeModel::for_dilatation(g.cone_a.max(1.0), &f, &grid);
            let m = |p, d| dilate_by_function(p, &f, &model, d).ok();
            let (s, bad) = map_checks(&model, &grid, ctx.common.seed, m)?;
            let r = verify_bilipschitz(|p| m(p, Direction::Forward), |t, rng: &mut _| model.sample(t, rng), &grid, pairs, ctx.common.seed);
            (format!("map: dilate by {}\n{}", f, s), bad, r)
        }
    };
    s.push_str(&report.to_string());
    if bad > 0.0 || report.verdict == LipschitzVerdict::Unbounded {
        return Err(CliError { code: EXIT_CERTIFICATE, message: s });
    }
    Ok(s)
}

fn render(ctx: &Ctx, file: &Path, at: Option<f64>) -> Result<String, CliError> {
    let g = ctx.load(file)?;
    let t = match at {
        Some(_) => snapshot_t(ctx, &g, at)?,
        None => validated_grid(&g, &ctx.grid_config())?[0].min(0.5f64.powi(5)),
    };
    let dir = ctx.svg_dir()?.unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let name = file.file_stem().and_then(|s| s.to_str()).unwrap_or("germ");
    let link = dir.join(format!("{}.svg", name));
    write_file(&link, &svg::render_germ(&g, t, name))?;
    let mut s = format!("wrote {}\n", link.display());
    if g.components.len() == 1 {
        if let Ok(trace) = classify_germ(ctx, &g) {
            let n = write_steps(dir, &trace, t)?;
            let _ = writeln!(s, "wrote {} reduction snapshots ({})", n, trace.form);
        }
    }
    Ok(s)
}

fn fuzz_cmd(ctx: &Ctx, count: usize, kind: FuzzKind, vertices: Option<usize>, out: Option<&Path>) -> Result<String, CliError> {
    if let Some(n) = vertices {
        if !(3..=12).contains(&n) {
            return Err(CliError::invalid("vertex count must be in 3..=12"));
        }
    }
    let mut rng = fuzz::rng(ctx.common.seed);
    if let Some(d) = out {
        fs::create_dir_all(d).map_err(|e| io_err(d, e))?;
    }
    let mut s = String::new();
    for k in 0..count {
        let n = vertices.unwrap_or_else(|| rng.gen_range(3..=10));
        let closed = match kind {
            FuzzKind::Closed => true,
            FuzzKind::Open => false,
            FuzzKind::Mixed => rng.gen_bool(0.5),
        };
        let g = if closed { fuzz::random_lne_closed(&mut rng, n) } else { fuzz::random_lne_open(&mut rng, n) };
        let text = format!("# seed {} germ {}\n{}", ctx.common.seed, k, format_germ(&g));
        match out {
            Some(d) => {
                let p = d.join(format!("fuzz-{:03}.germ", k));
                write_file(&p, &text)?;
                let _ = writeln!(s, "wrote {}", p.display());
            }
            None => s.push_str(&text),
        }
    }
    Ok(s)
}
