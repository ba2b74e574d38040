use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use flop_atlas::chambers::{
    base_divisor, enumerate_chambers, gamma_table, walk, Chamber, ResolutionModel, WalkConfig,
};
use flop_atlas::exactq::{Q, QMatrix, QVector};
use flop_atlas::fiberdiag::{load_fixture, states_equal, to_dot, walk_states};
use flop_atlas::jsonutil::canonical;
use flop_atlas::mckay::{conjugacy_class_count, wreath_z2};
use flop_atlas::rootsys::{
    a_even_orbit_order, a_odd_orbit_order, fold, involution, Family, RootSystem,
};
use flop_atlas::toricfan::{c4z3_fan, mukai_flop_fans, Fan};

#[derive(Parser)]
#[command(name = "flop-atlas", version, about = "Exact chamber walks and fiber diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem size (rank of the cyclic factor).
    #[arg(long, global = true, default_value_t = 2)]
    n: usize,
    /// Superincreasing wall spacings, comma separated (default: powers of two).
    #[arg(long, global = true, value_delimiter = ',')]
    beta: Option<Vec<i64>>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fixture directory for verify-golden (default: fixtures/n<N>).
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Folded Cartan matrices for the diagram involutions at this n.
    Fold,
    /// Weyl dimension formula sanity values on A_n.
    Weyl,
    /// All chambers of the movable cone.
    Chambers,
    /// The threshold walk through the chambers.
    Walk,
    /// Central-fiber diagrams along the walk (json or dot).
    Diagram,
    /// Compare walk diagrams against golden fixtures.
    VerifyGolden,
    Toric {
        #[command(subcommand)]
        sub: ToricCmd,
    },
    Mckay {
        #[command(subcommand)]
        sub: MckayCmd,
    },
}

#[derive(Subcommand)]
enum ToricCmd {
    /// The two fans of the Mukai flop in dimension 2r-1.
    Mukai {
        #[arg(long, default_value_t = 2)]
        r: usize,
    },
    /// Unimodular triangulation of the quotient-cone fan on six rays.
    C4z3,
}

#[derive(Subcommand)]
enum MckayCmd {
    /// Order and class count of the wreath product of Z_m with the swap.
    Wreath {
        #[arg(long, default_value_t = 2)]
        m: usize,
    },
}

/// Domain failure; surfaced as the originating module's error, exit code 1.
struct DomainError(String);

impl<E: std::fmt::Debug> From<E> for DomainError {
    fn from(e: E) -> Self {
        DomainError(format!("{:?}", e))
    }
}

fn q_str(q: &Q) -> Value {
    Value::String(q.to_string())
}

fn qvec_json(v: &QVector) -> Value {
    Value::Array(v.0.iter().map(q_str).collect())
}

fn qmat_json(m: &QMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| q_str(m.at(i, j))).collect()))
            .collect(),
    )
}

fn chamber_json(c: &Chamber) -> Value {
    let signs: Value = c
        .signs
        .iter()
        .map(|((i, j), s)| (format!("{},{}", i, j), json!(s)))
        .collect::<serde_json::Map<_, _>>()
        .into();
    json!({
        "signs": signs,
        "witness": qvec_json(&c.witness),
        "walls": c.walls.iter().map(qvec_json).collect::<Vec<_>>(),
    })
}

fn fan_json(fan: &Fan) -> Result<Value, DomainError> {
    Ok(json!({
        "rays": fan.rays.iter().map(qvec_json).collect::<Vec<_>>(),
        "maximal_cones": fan.maximal_cones,
        "unimodular": fan.all_unimodular()?,
    }))
}

fn walk_config(n: usize, beta: &Option<Vec<i64>>) -> Result<WalkConfig, DomainError> {
    match beta {
        Some(b) => Ok(WalkConfig::new(n, b.iter().map(|&x| Q::from_int(x)).collect())?),
        None => Ok(WalkConfig::default_beta(n)),
    }
}

fn run(cli: &Cli) -> Result<String, DomainError> {
    let n = cli.n;
    let text = match &cli.command {
        Command::Fold => {
            let odd = RootSystem::new(Family::A, 2 * n + 1)?;
            let even = RootSystem::new(Family::A, 2 * n)?;
            let folded_odd = fold(&odd, &involution(Family::A, 2 * n + 1)?, &a_odd_orbit_order(2 * n + 1))?;
            let folded_even = fold(&even, &involution(Family::A, 2 * n)?, &a_even_orbit_order(2 * n))?;
            canonical(&json!({
                "n": n,
                "a_odd": { "source_rank": 2 * n + 1, "matrix": qmat_json(&folded_odd) },
                "a_even": { "source_rank": 2 * n, "matrix": qmat_json(&folded_even) },
            }))
        }
        Command::Weyl => {
            let rs = RootSystem::new(Family::A, n)?;
            let zero = vec![Q::zero(); n];
            canonical(&json!({
                "family": "A",
                "rank": n,
                "positive_roots": rs.num_positive_roots(),
                "dim_at_zero": q_str(&rs.weyl_dim(&zero)),
                "dim_at_rho": q_str(&rs.weyl_dim(&rs.rho())),
            }))
        }
        Command::Chambers => {
            let model = ResolutionModel::new(n);
            let chambers = enumerate_chambers(&model)?;
            canonical(&json!({
                "n": n,
                "count": chambers.len(),
                "chambers": chambers.iter().map(chamber_json).collect::<Vec<_>>(),
            }))
        }
        Command::Walk => {
            let model = ResolutionModel::new(n);
            let config = walk_config(n, &cli.beta)?;
            let steps = walk(&model, &config)?;
            let gamma = gamma_table(&config);
            let records: Vec<Value> = steps
                .iter()
                .map(|s| {
                    json!({
                        "t_lo": q_str(&s.t_lo),
                        "t_hi": s.t_hi.as_ref().map(q_str),
                        "entered_by": s.entered_by.map(|(i, j)| format!("{},{}", i, j)),
                        "chamber": chamber_json(&s.chamber),
                    })
                })
                .collect();
            canonical(&json!({
                "n": n,
                "base_divisor": qvec_json(&base_divisor(&model, &config)),
                "thresholds": gamma
                    .iter()
                    .map(|((i, j), g)| (format!("{},{}", i, j), q_str(g)))
                    .collect::<serde_json::Map<_, _>>(),
                "steps": records,
            }))
        }
        Command::Diagram => {
            let states = walk_states(n)?;
            if cli.format == Format::Dot {
                states.iter().map(to_dot).collect::<Vec<_>>().join("\n")
            } else {
                let specs: Vec<Value> = states
                    .iter()
                    .map(|s| serde_json::to_value(s.to_spec()).expect("serialize"))
                    .collect();
                canonical(&specs)
            }
        }
        Command::VerifyGolden => {
            let dir = cli
                .fixtures
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("fixtures/n{}", n)));
            let states = walk_states(n)?;
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| DomainError(format!("fixtures dir {}: {}", dir.display(), e)))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(DomainError(format!("no fixtures in {}", dir.display())));
            }
            let mut lines = Vec::new();
            let mut failed = 0usize;
            for path in &paths {
                let name = path.file_name().unwrap().to_string_lossy().into_owned();
                let fixture = load_fixture(path)?;
                let ok = states
                    .iter()
                    .find(|s| s.interval.0 == fixture.interval.0)
                    .map(|s| states_equal(&s.to_spec(), &fixture))
                    .unwrap_or(false);
                if !ok {
                    failed += 1;
                }
                lines.push(format!("{} {}", if ok { "PASS" } else { "FAIL" }, name));
            }
            lines.push(format!("{}/{} pass", paths.len() - failed, paths.len()));
            if failed > 0 {
                return Err(DomainError(lines.join("\n")));
            }
            lines.join("\n")
        }
        Command::Toric { sub } => match sub {
            ToricCmd::Mukai { r } => {
                let (plus, minus) = mukai_flop_fans(*r);
                canonical(&json!({
                    "plus": fan_json(&plus)?,
                    "minus": fan_json(&minus)?,
                }))
            }
            ToricCmd::C4z3 => {
                let fan = c4z3_fan()?;
                canonical(&fan_json(&fan)?)
            }
        },
        Command::Mckay { sub } => match sub {
            MckayCmd::Wreath { m } => {
                let g = wreath_z2(*m);
                canonical(&json!({
                    "order": g.order,
                    "conjugacy_classes": conjugacy_class_count(&g),
                }))
            }
        },
    };
    Ok(text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.format == Format::Dot && !matches!(cli.command, Command::Diagram) {
        eprintln!("--format dot is only valid for the diagram command");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(text) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, format!("{}\n", text)) {
                    eprintln!("write {}: {}", path.display(), e);
                    return ExitCode::from(1);
                }
            } else {
                println!("{}", text);
            }
            ExitCode::SUCCESS
        }
        Err(DomainError(msg)) => {
            eprintln!("{}", msg);
            ExitCode::from(1)
        }
    }
}
