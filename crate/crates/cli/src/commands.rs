use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use halfdisk::bounds::{
    asymptotic_hop_ratio, empty_wedge_prob_exact, empty_wedge_prob_upper, hop_bounds, sigma_edge,
    sigma_interior_with, simplified_hop_bounds, BoundReport, InteriorCount,
};
use halfdisk::experiments::{
    run_connectivity, run_eta_sweep, run_hopcount, run_prop1, run_stepdist, run_uwedge, run_walk_hops,
    ConnectivityConfig, EtaSweepConfig, ExperimentReport, HopcountConfig, Prop1Config, StepdistConfig,
    UwedgeConfig, WalkHopsConfig,
};
use halfdisk::network::generate_ppp;
use halfdisk::rng::stream_rng;
use halfdisk::routing::{self, route_between_points, route_packet, write_trace_csv};
use halfdisk::walk::{self, walk_trace};
use halfdisk::{NetworkParams, NodeSet, Point2D, RegionKind, RegionSpec, RelayPolicy, RouteOutcome};
use serde::Serialize;

use crate::config::{ConfigError, Resolver};
use crate::{Cli, Command, ExpKind, Format, NetworkArgs};

struct Output {
    path: Option<PathBuf>,
    format: Format,
}

impl Output {
    fn write(&self, bytes: &[u8]) -> Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        self.write((serde_json::to_string_pretty(value)? + "\n").as_bytes())
    }
}

enum Job {
    Bounds(BoundsJob),
    Route(RouteJob),
    Walk { h: f64, range: f64, eta: f64, hop_cap: Option<u64> },
    Gen { params: NetworkParams },
    Connectivity(ConnectivityConfig),
    Hopcount(HopcountConfig),
    WalkHops(WalkHopsConfig),
    Stepdist(StepdistConfig),
    Prop1(Prop1Config),
    Eta(EtaSweepConfig),
    Uwedge(UwedgeConfig),
}

struct BoundsJob {
    n: f64,
    d: f64,
    eta: f64,
    count: InteriorCount,
    h: Vec<f64>,
    r: Vec<f64>,
    max_i: u64,
    etas: Vec<f64>,
}

struct RouteJob {
    lambda: f64,
    range: f64,
    region: RegionKind,
    size: Option<f64>,
    eta: f64,
    policy: RelayPolicy,
    h: f64,
    hop_cap: Option<u64>,
    nodes: Option<PathBuf>,
    src: Option<u64>,
    dst: Option<u64>,
}

/// Resolves flags against the config file, then runs the command. Returns
/// whether any experiment verdict was `violated`.
pub fn run(cli: &Cli, r: &Resolver) -> Result<bool> {
    let seed = r.count("seed", cli.seed, 0)?;
    let out = Output { path: r.path("out", cli.out.clone())?, format: r.parsed("format", cli.format, Format::Json)? };
    let threads = r.count("threads", cli.threads, 0)?;
    let job = resolve(&cli.command, r, seed)?;
    r.reject_unknown()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads as usize).build()?;
    pool.install(|| execute(job, seed, &out))
}

fn network(r: &Resolver, a: &NetworkArgs) -> Result<(f64, f64, RegionKind), ConfigError> {
    Ok((r.f64("lambda", a.lambda, 20.0)?, r.f64("R", a.range, 1.0)?, r.parsed("region", a.region, RegionKind::Disk)?))
}

fn resolve(cmd: &Command, r: &Resolver, seed: u64) -> Result<Job, ConfigError> {
    Ok(match cmd {
        Command::Bounds(a) => {
            let eta = r.f64("eta", a.eta, 0.5)?;
            Job::Bounds(BoundsJob {
                n: r.f64("N", a.n, 1e5)?,
                d: r.f64("d", a.d, 1e-3)?,
                eta,
                count: if r.flag("intermediate", a.intermediate)? {
                    InteriorCount::Intermediate
                } else {
                    InteriorCount::Simplified
                },
                h: r.list("h-over-R", a.h_over_r.clone(), &[])?,
                r: r.list("r-over-R", a.r_over_r.clone(), &[1.0])?,
                max_i: r.count("max-i", a.max_i, 0)?,
                etas: r.list("etas", a.etas.clone(), &[eta])?,
            })
        }
        Command::Route(a) => {
            let (lambda, range, region) = network(r, &a.net)?;
            Job::Route(RouteJob {
                lambda,
                range,
                region,
                size: r.opt_f64("size", a.size)?,
                eta: r.f64("eta", a.eta, 0.5)?,
                policy: r.parsed("policy", a.policy, RelayPolicy::RandomWedge)?,
                h: r.f64("h-over-R", a.h_over_r, 10.0)?,
                hop_cap: r.opt_count("hop-cap", a.hop_cap)?,
                nodes: r.path("nodes", a.nodes.clone())?,
                src: r.opt_count("src", a.src)?,
                dst: r.opt_count("dst", a.dst)?,
            })
        }
        Command::Walk(a) => Job::Walk {
            h: r.f64("h-over-R", a.h_over_r, 10.0)?,
            range: r.f64("R", a.range, 1.0)?,
            eta: r.f64("eta", a.eta, 0.5)?,
            hop_cap: r.opt_count("hop-cap", a.hop_cap)?,
        },
        Command::Gen(a) => {
            let (lambda, range, kind) = network(r, &a.net)?;
            let size = r.f64("size", a.size, 10.0)?;
            let params = RegionSpec::new(kind, size)
                .and_then(|region| NetworkParams::new(lambda, range, 0.5, region))
                .map_err(|e| ConfigError(e.to_string()))?;
            Job::Gen { params }
        }
        Command::Exp { kind } => match kind {
            ExpKind::Connectivity(a) => {
                let d = ConnectivityConfig::default();
                Job::Connectivity(ConnectivityConfig {
                    n: r.f64("N", a.n, d.n)?,
                    dn: r.list("dN", a.dn.clone(), &d.dn)?,
                    eta: r.f64("eta", a.eta, d.eta)?,
                    region: r.parsed("region", a.region, d.region)?,
                    trials: r.count("trials", a.trials, d.trials)?,
                    seed,
                })
            }
            ExpKind::Hopcount(a) => {
                let d = HopcountConfig::default();
                Job::Hopcount(HopcountConfig {
                    lambda: r.f64("lambda", a.lambda, d.lambda)?,
                    h_over_r: r.list("h-over-R", a.h_over_r.clone(), &d.h_over_r)?,
                    eta: r.f64("eta", a.eta, d.eta)?,
                    policy: r.parsed("policy", a.policy, d.policy)?,
                    trials: r.count("trials", a.trials, d.trials)?,
                    hop_cap: r.opt_count("hop-cap", a.hop_cap)?,
                    seed,
                })
            }
            ExpKind::Walk(a) => {
                let d = WalkHopsConfig::default();
                Job::WalkHops(WalkHopsConfig {
                    h_over_r: r.list("h-over-R", a.h_over_r.clone(), &d.h_over_r)?,
                    eta: r.f64("eta", a.eta, d.eta)?,
                    walks: r.count("trials", a.trials, d.walks)?,
                    hop_cap: r.opt_count("hop-cap", a.hop_cap)?,
                    seed,
                })
            }
            ExpKind::Stepdist(a) => {
                let d = StepdistConfig::default();
                Job::Stepdist(StepdistConfig {
                    r_over_r: r.list("r-over-R", a.r_over_r.clone(), &d.r_over_r)?,
                    trials: r.count("trials", a.trials, d.trials)?,
                    network_trials: r.count("network-trials", a.network_trials, d.network_trials)?,
                    lambda: r.f64("lambda", a.lambda, d.lambda)?,
                    seed,
                })
            }
            ExpKind::Prop1(a) => {
                let d = Prop1Config::default();
                Job::Prop1(Prop1Config {
                    lambda_area: r.list("lambda-area", a.lambda_area.clone(), &d.lambda_area)?,
                    trials: r.count("trials", a.trials, d.trials)?,
                    bins: r.count("bins", a.bins, d.bins as u64)? as usize,
                    min_per_bin: r.count("min-per-bin", a.min_per_bin, d.min_per_bin)?,
                    seed,
                })
            }
            ExpKind::Eta(a) => {
                let d = EtaSweepConfig::default();
                Job::Eta(EtaSweepConfig {
                    etas: r.list("etas", a.etas.clone(), &d.etas)?,
                    n: r.f64("N", a.n, d.n)?,
                    dn: r.f64("dN", a.dn, d.dn)?,
                    region: r.parsed("region", a.region, d.region)?,
                    trials: r.count("trials", a.trials, d.trials)?,
                    h_over_r: r.f64("h-over-R", a.h_over_r, d.h_over_r)?,
                    walks: r.count("walks", a.walks, d.walks)?,
                    seed,
                })
            }
            ExpKind::Uwedge(a) => {
                let d = UwedgeConfig::default();
                Job::Uwedge(UwedgeConfig {
                    max_i: r.count("max-i", a.max_i, d.max_i)?,
                    etas: r.list("etas", a.etas.clone(), &d.etas)?,
                    samples: r.count("trials", a.trials, d.samples)?,
                    seed,
                })
            }
        },
    })
}

fn execute(job: Job, seed: u64, out: &Output) -> Result<bool> {
    let report = match job {
        Job::Bounds(b) => return bounds(b, out).map(|_| false),
        Job::Route(rj) => return route(rj, seed, out).map(|_| false),
        Job::Walk { h, range, eta, hop_cap } => return walk(h, range, eta, hop_cap, seed, out).map(|_| false),
        Job::Gen { params } => return gen(&params, seed, out).map(|_| false),
        Job::Connectivity(c) => run_connectivity(&c)?,
        Job::Hopcount(c) => run_hopcount(&c)?,
        Job::WalkHops(c) => run_walk_hops(&c)?,
        Job::Stepdist(c) => run_stepdist(&c)?,
        Job::Prop1(c) => run_prop1(&c)?,
        Job::Eta(c) => run_eta_sweep(&c)?,
        Job::Uwedge(c) => run_uwedge(&c)?,
    };
    emit_report(&report, out)?;
    Ok(report.any_violated())
}

fn emit_report(report: &ExperimentReport, out: &Output) -> Result<()> {
    match out.format {
        Format::Json => out.write(report.to_json()?.as_bytes()),
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            out.write(&buf)
        }
    }
}

#[derive(Serialize)]
struct HopRow {
    #[serde(rename = "h_over_R")]
    h_over_r: f64,
    #[serde(rename = "r_over_R")]
    r_over_r: f64,
    lower: f64,
    upper: f64,
    simplified_lower: Option<f64>,
    simplified_upper: Option<f64>,
}

#[derive(Serialize)]
struct WedgeRow {
    i: u64,
    eta: f64,
    exact: f64,
    upper: f64,
}

#[derive(Serialize)]
struct BoundsOutput {
    bound_report: BoundReport,
    asymptotic_hop_ratio: f64,
    hop_bounds: Vec<HopRow>,
    empty_wedge: Vec<WedgeRow>,
}

fn bounds(b: BoundsJob, out: &Output) -> Result<()> {
    let interior = sigma_interior_with(b.n, b.d, b.eta, b.count)?;
    let edge = sigma_edge(b.n, b.d, b.eta)?;
    let report = BoundReport {
        sigma_interior: interior,
        sigma_edge: edge,
        sigma_total: interior + edge,
        n: b.n,
        d: b.d,
        eta: b.eta,
    };
    let mut hops = Vec::new();
    for &h in &b.h {
        for &r in &b.r {
            let hb = hop_bounds(h, r, 1.0)?;
            let simple = (r == 1.0).then(|| simplified_hop_bounds(h, 1.0));
            hops.push(HopRow {
                h_over_r: h,
                r_over_r: r,
                lower: hb.lower,
                upper: hb.upper,
                simplified_lower: simple.map(|s| s.lower),
                simplified_upper: simple.map(|s| s.upper),
            });
        }
    }
    let mut wedge = Vec::new();
    for &eta in &b.etas {
        for i in 1..=b.max_i {
            wedge.push(WedgeRow {
                i,
                eta,
                exact: empty_wedge_prob_exact(i, eta)?,
                upper: empty_wedge_prob_upper(i, eta)?,
            });
        }
    }
    let output = BoundsOutput { bound_report: report, asymptotic_hop_ratio: asymptotic_hop_ratio(), hop_bounds: hops, empty_wedge: wedge };
    match out.format {
        Format::Json => out.json(&output),
        Format::Csv => {
            let mut s = String::from("quantity,N,d,eta,i,h_over_R,r_over_R,value\n");
            let (n, d, eta) = (b.n, b.d, b.eta);
            for (q, v) in [
                ("sigma_interior", report.sigma_interior),
                ("sigma_edge", report.sigma_edge),
                ("sigma_total", report.sigma_total),
            ] {
                s += &format!("{q},{n},{d},{eta},,,,{v}\n");
            }
            s += &format!("asymptotic_hop_ratio,,,,,,,{}\n", output.asymptotic_hop_ratio);
            for h in &output.hop_bounds {
                let (hh, rr) = (h.h_over_r, h.r_over_r);
                s += &format!("hop_lower,,,0.5,,{hh},{rr},{}\n", h.lower);
                s += &format!("hop_upper,,,0.5,,{hh},{rr},{}\n", h.upper);
                if let (Some(lo), Some(hi)) = (h.simplified_lower, h.simplified_upper) {
                    s += &format!("hop_simplified_lower,,,0.5,,{hh},{rr},{lo}\n");
                    s += &format!("hop_simplified_upper,,,0.5,,{hh},{rr},{hi}\n");
                }
            }
            for w in &output.empty_wedge {
                s += &format!("empty_wedge_exact,,,{},{},,,{}\n", w.eta, w.i, w.exact);
                s += &format!("empty_wedge_upper,,,{},{},,,{}\n", w.eta, w.i, w.upper);
            }
            out.write(s.as_bytes())
        }
    }
}

#[derive(Serialize)]
struct RouteOutput {
    #[serde(flatten)]
    outcome: RouteOutcome,
    source: Point2D,
    destination: Point2D,
    nodes: usize,
}

fn route(j: RouteJob, seed: u64, out: &Output) -> Result<()> {
    let h = j.h * j.range;
    let size = j.size.unwrap_or(match j.region {
        RegionKind::Disk => h / 2.0 + 4.0 * j.range,
        RegionKind::Square => h + 8.0 * j.range,
    });
    let region = RegionSpec::new(j.region, size)?;
    let params = NetworkParams::new(j.lambda, j.range, j.eta, region)?;
    let ns = match &j.nodes {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            NodeSet::read_csv(BufReader::new(file), region, j.range)?
        }
        None => generate_ppp(&params, seed),
    };
    let mut rng = stream_rng(seed, 1);
    let (outcome, source, destination, dst_id, from_node) = match (j.src, j.dst) {
        (Some(s), Some(d)) => {
            let (s, d) = (s as usize, d as usize);
            let (sp, dp) = (ns.position(s)?, ns.position(d)?);
            let cap = j.hop_cap.unwrap_or_else(|| routing::default_hop_cap(sp.distance(dp), j.range));
            (route_packet(&ns, s, d, j.policy, &params, cap, &mut rng)?, sp, dp, Some(d), true)
        }
        (None, None) => {
            let (sp, dp) = (Point2D::new(-h / 2.0, 0.0), Point2D::new(h / 2.0, 0.0));
            let cap = j.hop_cap.unwrap_or_else(|| routing::default_hop_cap(h, j.range));
            (route_between_points(&ns, sp, dp, j.policy, &params, cap, &mut rng)?, sp, dp, None, false)
        }
        _ => return Err(ConfigError("--src and --dst must be given together".into()).into()),
    };
    match out.format {
        Format::Json => out.json(&RouteOutput { outcome, source, destination, nodes: ns.len() }),
        Format::Csv => {
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, &outcome, &ns, source, from_node, destination, dst_id)?;
            out.write(&buf)
        }
    }
}

#[derive(Serialize)]
struct WalkOutput {
    h: f64,
    #[serde(rename = "R")]
    range: f64,
    eta: f64,
    steps: u64,
    absorbed: bool,
    trace: Vec<walk::WalkState>,
}

fn walk(h_over_r: f64, range: f64, eta: f64, hop_cap: Option<u64>, seed: u64, out: &Output) -> Result<()> {
    let h = h_over_r * range;
    let cap = hop_cap.unwrap_or_else(|| walk::default_hop_cap(h, range));
    let trace = walk_trace(h, range, eta, cap, seed)?;
    let last = *trace.last().expect("trace holds the start");
    match out.format {
        Format::Json => out.json(&WalkOutput { h, range, eta, steps: last.t, absorbed: last.r <= range, trace }),
        Format::Csv => {
            let mut buf = Vec::new();
            walk::write_trace_csv(&mut buf, &trace)?;
            out.write(&buf)
        }
    }
}

#[derive(Serialize)]
struct NodeRow {
    id: usize,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct GenOutput {
    params: NetworkParams,
    nodes: Vec<NodeRow>,
}

fn gen(params: &NetworkParams, seed: u64, out: &Output) -> Result<()> {
    let ns = generate_ppp(params, seed);
    match out.format {
        Format::Json => out.json(&GenOutput {
            params: *params,
            nodes: ns.positions().iter().enumerate().map(|(id, p)| NodeRow { id, x: p.x, y: p.y }).collect(),
        }),
        Format::Csv => {
            let mut buf = Vec::new();
            ns.write_csv(&mut buf)?;
            out.write(&buf)
        }
    }
}
