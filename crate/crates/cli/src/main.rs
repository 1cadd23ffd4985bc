//! `perioloz`: sample, verify and visualize random plane partitions under
//! period-k volume weights with a corner modification.
//!
//! Every command is deterministic given (spec, seed, tolerances, version)
//! and emits a reproducibility stamp (spec hash, seed, version) with its
//! output. `PERIOLOZ_THREADS` caps the rayon pool.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use perioloz_core::asymptotics::{critical_points, turning_points, LimitSpec, MiddleModel};
use perioloz_core::facets::facet_words;
use perioloz_core::kernel::{correlation, QuadParams};
use perioloz_core::lattice::{Half, LatticePoint, PlanePartition, Window};
use perioloz_core::limit_kernel::{
    bulk_kernel, gue_corners_kernel, middle_kernel, turning_kernel, BulkQuery, MiddleQuery,
    TurningQuery,
};
use perioloz_core::oracle::{self, TruncationBox};
use perioloz_core::render::{overlays_for, render_tiling_stamped};
use perioloz_core::sampler::{Sampler, Truncation};
use perioloz_core::weights::WeightSpec;

#[derive(Parser)]
#[command(name = "perioloz", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Weight or limit spec file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output file or directory; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a weight spec, exiting 2 with a diagnostic if invalid.
    Validate {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Draw exact samples and write them as JSON partitions or a packed
    /// CSV of horizontal-lozenge windows.
    Sample {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, short)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tail_tol: f64,
        #[arg(long, default_value = "json")]
        format: String,
        /// Window "tmin tmax hmin hmax" for the CSV format.
        #[arg(long, num_args = 4, allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
    },
    /// Exact partition function and correlations for a truncated system.
    Oracle {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 12)]
        max_rows: usize,
        #[arg(long, default_value_t = 16)]
        max_entry: u32,
        /// CSV of point sets, one set per row as "t,h,t,h,...".
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
    },
    /// Kernel-determinant correlations for point sets read from CSV.
    Correlate {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Phase classification on a (tau, chi) grid.
    Phase {
        #[command(flatten)]
        common: CommonOpts,
        /// Grid "tmin tmax cmin cmax n".
        #[arg(long, num_args = 5, allow_hyphen_values = true)]
        grid: Vec<f64>,
    },
    /// Turning-point data of a limit spec.
    Turning {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Limit-kernel evaluation from a JSON query file.
    LimitKernel {
        /// One of: bulk, turning, gue, middle.
        kind: String,
        /// Limit spec (bulk/turning kinds).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predicted frozen-facet words of a limit spec.
    Facets {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Render a plane partition (JSON) to SVG.
    Render {
        /// Plane partition JSON file.
        #[arg(long)]
        pp: PathBuf,
        /// Window "tmin tmax hmin hmax" in lattice coordinates.
        #[arg(long, num_args = 4, allow_hyphen_values = true)]
        window: Vec<f64>,
        /// Weight spec for analytic overlays.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = false)]
        overlays: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    if let Ok(threads) = std::env::var("PERIOLOZ_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<perioloz_core::Error>()
                .map(|err| matches!(err, perioloz_core::Error::InvalidSpec(_)))
                .unwrap_or(false)
            {
                2
            } else {
                1
            }
        }
    };
    std::process::exit(code);
}

#[derive(Serialize, Clone)]
struct Stamp {
    version: &'static str,
    command: String,
    spec_sha256: String,
    seed: Option<u64>,
    tol: Option<f64>,
}

impl Stamp {
    fn new(command: &str, spec_path: &Path) -> Result<Self> {
        let bytes = fs::read(spec_path)
            .with_context(|| format!("reading spec {}", spec_path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let spec_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(Stamp {
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            spec_sha256,
            seed: None,
            tol: None,
        })
    }

    fn comment(&self) -> String {
        let mut s = format!(
            "# perioloz v{} cmd={} spec_sha256={}",
            self.version, self.command, self.spec_sha256
        );
        if let Some(seed) = self.seed {
            s.push_str(&format!(" seed={seed}"));
        }
        if let Some(tol) = self.tol {
            s.push_str(&format!(" tol={tol}"));
        }
        s
    }
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn load_weight_spec(path: &Path) -> Result<WeightSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading spec {}", path.display()))?;
    Ok(WeightSpec::from_json(&text)?)
}

fn load_limit_spec(path: &Path) -> Result<LimitSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading spec {}", path.display()))?;
    Ok(LimitSpec::from_json(&text)?)
}

/// Rows of "t,h,t,h,..." into point sets; blank lines and '#' comments skipped.
fn parse_point_sets(path: &Path) -> Result<Vec<Vec<LatticePoint>>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading points {}", path.display()))?;
    let mut sets = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("line {}: not numeric", lineno + 1))?;
        if fields.len() % 2 != 0 {
            bail!("line {}: odd number of fields", lineno + 1);
        }
        let mut set = Vec::new();
        for pair in fields.chunks(2) {
            let t = pair[0].round() as i64;
            set.push(LatticePoint::new(t, Half::from_f64(pair[1]))?);
        }
        sets.push(set);
    }
    Ok(sets)
}

fn window_from(vals: &[f64]) -> Window {
    Window {
        t_min: vals[0].round() as i64,
        t_max: vals[1].round() as i64,
        h_min: vals[2],
        h_max: vals[3],
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { spec } => {
            let s = load_weight_spec(&spec)?;
            println!(
                "valid: k={} d={} r={} gamma={} betas={:?}",
                s.k(),
                s.d(),
                s.r(),
                s.gamma(),
                s.beta().distinct()
            );
            Ok(())
        }
        Command::Sample {
            common,
            n,
            seed,
            tail_tol,
            format,
            window,
        } => {
            let spec = load_weight_spec(&common.spec)?;
            let mut stamp = Stamp::new("sample", &common.spec)?;
            stamp.seed = Some(seed);
            let sampler = Sampler::new(
                &spec,
                Truncation {
                    row_cut: None,
                    tail_tol,
                },
            )?;
            match format.as_str() {
                "json" => {
                    let dir = common
                        .out
                        .clone()
                        .unwrap_or_else(|| PathBuf::from("samples"));
                    fs::create_dir_all(&dir)?;
                    for i in 0..n {
                        let pp = sampler.sample(seed, i);
                        let doc = serde_json::json!({
                            "stamp": stamp,
                            "index": i,
                            "tail_bound": sampler.tail_bound(),
                            "rows": pp.rows(),
                        });
                        fs::write(
                            dir.join(format!("sample_{i:06}.json")),
                            serde_json::to_string(&doc)?,
                        )?;
                    }
                    eprintln!(
                        "wrote {n} samples to {} (row cut {}, tail bound {:.3e})",
                        dir.display(),
                        sampler.row_cut(),
                        sampler.tail_bound()
                    );
                }
                "csv" => {
                    let w = window_from(
                        window
                            .as_deref()
                            .context("--window is required for csv output")?,
                    );
                    let mut out = String::new();
                    out.push_str(&stamp.comment());
                    out.push('\n');
                    out.push_str("sample,t,h\n");
                    for i in 0..n {
                        let pp = sampler.sample(seed, i);
                        for p in pp.horizontal_lozenges(&w) {
                            out.push_str(&format!("{i},{},{}\n", p.t, p.h));
                        }
                    }
                    write_output(&common.out, &out)?;
                }
                other => bail!("unknown sample format {other:?} (json or csv)"),
            }
            Ok(())
        }
        Command::Oracle {
            common,
            max_rows,
            max_entry,
            points,
            budget,
        } => {
            let spec = load_weight_spec(&common.spec)?;
            let stamp = Stamp::new("oracle", &common.spec)?;
            let tbox = TruncationBox {
                max_rows,
                max_entry,
            };
            let rep = oracle::partition_function(&spec, &tbox, budget)?;
            let mut correlations = Vec::new();
            if let Some(pts_path) = points {
                for set in parse_point_sets(&pts_path)? {
                    let rho = oracle::exact_correlation(&spec, &tbox, &set, budget)?;
                    let coords: Vec<(i64, f64)> =
                        set.iter().map(|p| (p.t, p.h.as_f64())).collect();
                    correlations.push(serde_json::json!({
                        "points": coords,
                        "rho": rho,
                    }));
                }
            }
            let doc = serde_json::json!({
                "stamp": stamp,
                "Z": rep.z,
                "log_Z": rep.log_z,
                "Z_infinite": rep.z_infinite,
                "tail_bound": rep.tail_bound,
                "correlations": correlations,
            });
            write_output(&common.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))
        }
        Command::Correlate {
            common,
            points,
            tol,
        } => {
            let spec = load_weight_spec(&common.spec)?;
            let mut stamp = Stamp::new("correlate", &common.spec)?;
            stamp.tol = Some(tol);
            let quad = QuadParams::with_tol(tol);
            let mut out = String::new();
            out.push_str(&stamp.comment());
            out.push('\n');
            for set in parse_point_sets(&points)? {
                let val = correlation(&spec, &set, &quad)?;
                let coords: Vec<String> = set
                    .iter()
                    .map(|p| format!("{},{}", p.t, p.h))
                    .collect();
                out.push_str(&format!(
                    "{},{},{}\n",
                    coords.join(","),
                    val.rho,
                    val.err_est
                ));
            }
            write_output(&common.out, &out)
        }
        Command::Phase { common, grid } => {
            let l = load_limit_spec(&common.spec)?;
            let stamp = Stamp::new("phase", &common.spec)?;
            if grid.len() != 5 {
                bail!("--grid wants: tmin tmax cmin cmax n");
            }
            let (tmin, tmax, cmin, cmax) = (grid[0], grid[1], grid[2], grid[3]);
            let n = grid[4] as usize;
            let mut out = String::new();
            out.push_str(&stamp.comment());
            out.push('\n');
            out.push_str("tau,chi,n_complex_pairs,roots\n");
            for i in 0..n {
                for j in 0..n {
                    let tau = tmin + (tmax - tmin) * i as f64 / (n - 1).max(1) as f64;
                    let chi = cmin + (cmax - cmin) * j as f64 / (n - 1).max(1) as f64;
                    let p = critical_points(&l, tau, chi)?;
                    let roots: Vec<String> = p
                        .roots
                        .iter()
                        .map(|z| format!("{}{:+}i", z.re, z.im))
                        .collect();
                    out.push_str(&format!(
                        "{tau},{chi},{},{}\n",
                        p.n_complex_pairs,
                        roots.join(";")
                    ));
                }
            }
            write_output(&common.out, &out)
        }
        Command::Turning { common } => {
            let l = load_limit_spec(&common.spec)?;
            let stamp = Stamp::new("turning", &common.spec)?;
            let tps = turning_points(&l);
            let doc = serde_json::json!({
                "stamp": stamp,
                "turning_points": tps,
            });
            write_output(&common.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))
        }
        Command::LimitKernel {
            kind,
            spec,
            query,
            out,
        } => {
            let qtext = fs::read_to_string(&query)
                .with_context(|| format!("reading query {}", query.display()))?;
            let qjson: serde_json::Value = serde_json::from_str(&qtext)?;
            let mut body = String::new();
            match kind.as_str() {
                "bulk" => {
                    let l = load_limit_spec(spec.as_deref().context("--spec required")?)?;
                    let tau = qjson["tau"].as_f64().context("query.tau")?;
                    let chi = qjson["chi"].as_f64().context("query.chi")?;
                    body.push_str("t1,t2,dh,re,im\n");
                    for pair in qjson["pairs"].as_array().context("query.pairs")? {
                        let q = BulkQuery {
                            tau,
                            chi,
                            t1: pair["t1"].as_i64().context("t1")?,
                            t2: pair["t2"].as_i64().context("t2")?,
                            dh: Half::from_f64(pair["dh"].as_f64().context("dh")?),
                        };
                        let v = bulk_kernel(&l, &q)?;
                        body.push_str(&format!(
                            "{},{},{},{},{}\n",
                            q.t1, q.t2, q.dh, v.re, v.im
                        ));
                    }
                }
                "turning" => {
                    let l = load_limit_spec(spec.as_deref().context("--spec required")?)?;
                    let j = qjson["j"].as_u64().context("query.j")? as usize;
                    body.push_str("t_hat1,t_hat2,h_hat1,h_hat2,value\n");
                    for p in qjson["points"].as_array().context("query.points")? {
                        let q = TurningQuery {
                            j,
                            t_hat1: p["t_hat1"].as_i64().context("t_hat1")?,
                            t_hat2: p["t_hat2"].as_i64().context("t_hat2")?,
                            h_hat1: p["h_hat1"].as_f64().context("h_hat1")?,
                            h_hat2: p["h_hat2"].as_f64().context("h_hat2")?,
                        };
                        let v = turning_kernel(&l, &q)?;
                        body.push_str(&format!(
                            "{},{},{},{},{v}\n",
                            q.t_hat1, q.t_hat2, q.h_hat1, q.h_hat2
                        ));
                    }
                }
                "gue" => {
                    let c = qjson["c"].as_f64().context("query.c")?;
                    body.push_str("t1,t2,h1,h2,value\n");
                    for p in qjson["points"].as_array().context("query.points")? {
                        let (t1, t2) = (
                            p["t1"].as_i64().context("t1")?,
                            p["t2"].as_i64().context("t2")?,
                        );
                        let (h1, h2) = (
                            p["h1"].as_f64().context("h1")?,
                            p["h2"].as_f64().context("h2")?,
                        );
                        let v = gue_corners_kernel(c, t1, t2, h1, h2)?;
                        body.push_str(&format!("{t1},{t2},{h1},{h2},{v}\n"));
                    }
                }
                "middle" => {
                    let alpha = qjson["alpha"].as_f64().context("query.alpha")?;
                    let chi = qjson["chi"].as_f64().context("query.chi")?;
                    let mm = MiddleModel::new(alpha)?;
                    body.push_str("t1,t2,dh,re,im\n");
                    for pair in qjson["pairs"].as_array().context("query.pairs")? {
                        let q = MiddleQuery {
                            chi,
                            t1: pair["t1"].as_i64().context("t1")?,
                            t2: pair["t2"].as_i64().context("t2")?,
                            dh: Half::from_f64(pair["dh"].as_f64().context("dh")?),
                        };
                        let v = middle_kernel(&mm, &q)?;
                        body.push_str(&format!(
                            "{},{},{},{},{}\n",
                            q.t1, q.t2, q.dh, v.re, v.im
                        ));
                    }
                }
                other => bail!("unknown limit-kernel kind {other:?}"),
            }
            let mut content = format!("# perioloz v{} cmd=limit-kernel/{kind}\n", env!("CARGO_PKG_VERSION"));
            content.push_str(&body);
            write_output(&out, &content)
        }
        Command::Facets { common } => {
            let l = load_limit_spec(&common.spec)?;
            let stamp = Stamp::new("facets", &common.spec)?;
            let doc = serde_json::json!({
                "stamp": stamp,
                "facets": facet_words(&l),
            });
            write_output(&common.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))
        }
        Command::Render {
            pp,
            window,
            spec,
            overlays,
            out,
        } => {
            let text = fs::read_to_string(&pp)
                .with_context(|| format!("reading partition {}", pp.display()))?;
            let partition = PlanePartition::from_json(&text)?;
            let w = window_from(&window);
            let o = if overlays {
                let spec_path = spec.as_deref().context("--spec required for overlays")?;
                let s = load_weight_spec(spec_path)?;
                overlays_for(&s, true, true)
            } else {
                Default::default()
            };
            let stamp = format!("perioloz v{}", env!("CARGO_PKG_VERSION"));
            let svg = render_tiling_stamped(&partition, &w, &o, &stamp)?;
            write_output(&out, &svg)
        }
    }
}
