use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sidewalk_access::analysis::AnalysisOptions;
use sidewalk_access::geo::GeoPoint;
use sidewalk_access::graph::{DEFAULT_MAX_SNAP_M, DEFAULT_MERGE_EPS_M};
use sidewalk_access::pipeline::{run_analyze, run_graph, run_route, run_score, ScoreLevel, ScoreRequest};
use sidewalk_access::profiles::LabelWeighting;
use sidewalk_access::routing::{RouteOptions, Search, DEFAULT_ROUTE_SNAP_M};
use sidewalk_access::scoring::DEFAULT_PERCENTILE;
use sidewalk_access::service::{serve, ServiceConfig};
use sidewalk_access::{Error, Result};

#[derive(Parser)]
#[command(
    name = "sidewalk-access",
    version,
    about = "Mobility-aid aware sidewalk scoring and routing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive per-group profiles and the analysis report from survey responses.
    Analyze {
        #[arg(long)]
        survey: PathBuf,
        #[arg(long)]
        out_profiles: PathBuf,
        #[arg(long)]
        out_report: PathBuf,
        /// Also analyze respondents whose aid is "other".
        #[arg(long)]
        include_other: bool,
    },
    /// Build the sidewalk graph and snap barrier labels onto it.
    Graph {
        #[arg(long)]
        sidewalks: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MERGE_EPS_M)]
        merge_eps_m: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_SNAP_M)]
        snap_max_m: f64,
    },
    /// Score segments or neighborhoods for one profile.
    Score {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long)]
        profile_id: String,
        #[arg(long, value_parser = parse_level)]
        level: ScoreLevel,
        #[arg(long)]
        neighborhoods: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PERCENTILE)]
        percentile: f64,
        /// Scale each label's C by its severity (0.5 / 1 / 1.5).
        #[arg(long)]
        severity_weighting: bool,
    },
    /// Route between two points for one profile.
    Route {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long)]
        profile_id: String,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        from: GeoPoint,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        to: GeoPoint,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ROUTE_SNAP_M)]
        max_snap_m: f64,
        /// Plain label-setting search without the A* bound.
        #[arg(long)]
        heap_only: bool,
        #[arg(long)]
        severity_weighting: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_level(s: &str) -> std::result::Result<ScoreLevel, String> {
    s.parse()
}

fn parse_point(s: &str) -> std::result::Result<GeoPoint, String> {
    s.parse()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn weighting(severity: bool) -> LabelWeighting {
    if severity {
        LabelWeighting::SeverityScaled
    } else {
        LabelWeighting::TypeLevel
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze {
            survey,
            out_profiles,
            out_report,
            include_other,
        } => {
            let out = run_analyze(&read(&survey)?, AnalysisOptions { include_other })?;
            write(&out_profiles, &out.profiles_json)?;
            write(&out_report, &out.report_json)?;
            log::info!("wrote {} profiles", out.profiles.len());
        }
        Command::Graph {
            sidewalks,
            labels,
            out,
            merge_eps_m,
            snap_max_m,
        } => {
            let doc = run_graph(&read(&sidewalks)?, &read(&labels)?, merge_eps_m, snap_max_m)?;
            write(&out, &doc)?;
        }
        Command::Score {
            graph,
            profiles,
            profile_id,
            level,
            neighborhoods,
            out,
            percentile,
            severity_weighting,
        } => {
            let hoods = neighborhoods.as_deref().map(read).transpose()?;
            let req = ScoreRequest {
                profile_id: &profile_id,
                level,
                neighborhoods_geojson: hoods.as_deref(),
                percentile,
                weighting: weighting(severity_weighting),
            };
            write(&out, &run_score(&read(&graph)?, &read(&profiles)?, &req)?)?;
        }
        Command::Route {
            graph,
            profiles,
            profile_id,
            from,
            to,
            out,
            max_snap_m,
            heap_only,
            severity_weighting,
        } => {
            let options = RouteOptions {
                max_snap_m,
                search: if heap_only { Search::HeapOnly } else { Search::AStar },
                weighting: weighting(severity_weighting),
            };
            let doc = run_route(&read(&graph)?, &read(&profiles)?, &profile_id, from, to, &options)?;
            write(&out, &doc)?;
        }
        Command::Serve { config } => {
            let config = ServiceConfig::load(&config)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
            rt.block_on(serve(config))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let record = serde_json::json!({
                "error": {
                    "module": "interface",
                    "kind": "usage",
                    "message": e.to_string().trim_end(),
                }
            });
            eprintln!("{record}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_record());
            ExitCode::FAILURE
        }
    }
}
