//! Command-line front end: renders constellations, rate-region sweeps, and
//! Monte Carlo BER curves as CSV files.
//!
//! Every command takes its parameters from flags, falling back to an
//! optional `--config` JSON file (flags win), and prints the fully resolved
//! configuration before running, so a run can be reproduced from its log.
//! Output locations resolve against `NOMALAB_OUT_DIR` when the path is
//! relative. Exit codes: 0 on success, 2 for invalid parameters, 1 for
//! runtime failures.

use std::fmt::Display;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use nomalab::anoma::{gaussian_rates, PulseShape, RateNormalization, StackedModel};
use nomalab::cdnoma::SignatureMatrix;
use nomalab::constellation::{Constellation, ConstellationKind, PowerSplit, SuperConstellation};
use nomalab::rates::{
    mac_region_vertices, noma_downlink_rates, rsma_downlink_rates, rsma_uplink_split_sweep,
    RatePoint, RsmaDownlink,
};
use nomalab::sim::{
    run_ber, BerCurve, LdsScenario, NomaPairScenario, PairDetector, QpskAwgnScenario, Scenario,
    SimConfig, TcDecoder, TcNomaScenario, TcmScenario,
};
use nomalab::tcm::Trellis;

#[derive(Parser)]
#[command(
    name = "nomalab",
    version,
    about = "Link-level experiments with superimposed users: constellations, rate regions, BER sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a two-user super-constellation as `re,im,label1,label2` CSV.
    Constellation(ConstellationArgs),
    /// Sweep an achievable-rate region as `setting,user,rate` CSV.
    RateRegion(RateRegionArgs),
    /// Coded 8-PSK versus uncoded QPSK BER at equal spectral efficiency,
    /// as `snr_db,scheme,ber,errors,trials,ci95` CSV.
    TcmBer(TcmBerArgs),
    /// Monte Carlo BER sweep of a bundled scenario, as
    /// `snr_db,user,ber,errors,trials,ci95` CSV.
    Ber(BerArgs),
}

/// Failures split by who is at fault: bad input exits 2, everything that
/// goes wrong while executing a valid request exits 1.
enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn invalid(message: impl Display) -> Self {
        Self::Validation(message.to_string())
    }

    fn runtime(message: impl Display) -> Self {
        Self::Runtime(message.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Constellation(args) => run_constellation(args),
        Command::RateRegion(args) => run_rate_region(args),
        Command::TcmBer(args) => run_tcm_ber(args),
        Command::Ber(args) => run_ber_command(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

// ---------------------------------------------------------------- plumbing

fn load_json<T: serde::de::DeserializeOwned + Default>(
    path: Option<&PathBuf>,
) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))
}

/// Flag beats file beats default.
fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Resolves the output file: relative paths land in `NOMALAB_OUT_DIR` when
/// that is set, otherwise in the working directory.
fn resolve_out(out: Option<PathBuf>, default_name: &str) -> PathBuf {
    let out = out.unwrap_or_else(|| PathBuf::from(default_name));
    if out.is_absolute() {
        return out;
    }
    match std::env::var_os("NOMALAB_OUT_DIR") {
        Some(dir) => PathBuf::from(dir).join(out),
        None => out,
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::runtime(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

fn echo_config<T: Serialize>(resolved: &T) {
    match serde_json::to_string(resolved) {
        Ok(json) => println!("config: {json}"),
        Err(e) => eprintln!("warning: cannot render resolved config: {e}"),
    }
}

/// Parses a config-file enum value with the same spellings the flag takes.
fn enum_from_file<E: ValueEnum>(text: &str, what: &str) -> Result<E, CliError> {
    E::from_str(text, false)
        .map_err(|_| CliError::invalid(format!("{what} {text:?} is not a known value")))
}

// ----------------------------------------------------------- constellation

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KindArg {
    Psk,
    Qam,
}

impl From<KindArg> for ConstellationKind {
    fn from(kind: KindArg) -> Self {
        match kind {
            KindArg::Psk => ConstellationKind::Psk,
            KindArg::Qam => ConstellationKind::Qam,
        }
    }
}

#[derive(Args)]
struct ConstellationArgs {
    /// Constellation family of user 1.
    #[arg(long, value_enum)]
    kind1: Option<KindArg>,
    /// Points in user 1's constellation (power of two).
    #[arg(long)]
    order1: Option<usize>,
    /// Constellation family of user 2.
    #[arg(long, value_enum)]
    kind2: Option<KindArg>,
    /// Points in user 2's constellation (power of two).
    #[arg(long)]
    order2: Option<usize>,
    /// Power share of user 1 in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Total transmit power (linear).
    #[arg(long)]
    power: Option<f64>,
    /// Rotation of user 2's constellation in radians.
    #[arg(long)]
    rotation2: Option<f64>,
    /// JSON file supplying any of the other parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstellationFile {
    kind1: Option<String>,
    order1: Option<usize>,
    kind2: Option<String>,
    order2: Option<usize>,
    alpha: Option<f64>,
    power: Option<f64>,
    rotation2: Option<f64>,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ConstellationResolved {
    kind1: KindArg,
    order1: usize,
    kind2: KindArg,
    order2: usize,
    alpha: f64,
    power: f64,
    rotation2: f64,
    out: PathBuf,
}

fn kind_of(flag: Option<KindArg>, file: Option<String>) -> Result<KindArg, CliError> {
    match (flag, file) {
        (Some(kind), _) => Ok(kind),
        (None, Some(text)) => enum_from_file(&text, "constellation kind"),
        (None, None) => Ok(KindArg::Psk),
    }
}

fn run_constellation(args: ConstellationArgs) -> Result<(), CliError> {
    let file: ConstellationFile = load_json(args.config.as_ref())?;
    let resolved = ConstellationResolved {
        kind1: kind_of(args.kind1, file.kind1)?,
        order1: pick(args.order1, file.order1, 4),
        kind2: kind_of(args.kind2, file.kind2)?,
        order2: pick(args.order2, file.order2, 4),
        alpha: pick(args.alpha, file.alpha, 0.2),
        power: pick(args.power, file.power, 1.0),
        rotation2: pick(args.rotation2, file.rotation2, 0.0),
        out: resolve_out(args.out.or(file.out), "constellation.csv"),
    };
    echo_config(&resolved);
    let c1 = Constellation::standard(resolved.kind1.into(), resolved.order1)
        .map_err(CliError::invalid)?;
    let mut c2 = Constellation::standard(resolved.kind2.into(), resolved.order2)
        .map_err(CliError::invalid)?;
    if resolved.rotation2 != 0.0 {
        c2 = c2.rotated(resolved.rotation2);
    }
    let split = PowerSplit::new(resolved.alpha, resolved.power).map_err(CliError::invalid)?;
    let sc = SuperConstellation::superimpose(&c1, &c2, split);
    let mut csv = Vec::new();
    sc.write_csv(&mut csv).map_err(CliError::runtime)?;
    write_file(&resolved.out, &csv)?;
    println!(
        "points={} distinct={} min_distance={}",
        sc.len(),
        sc.distinct_count(1e-9),
        sc.min_distance()
    );
    Ok(())
}

// ------------------------------------------------------------- rate-region

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SchemeArg {
    /// Two-user multiple-access corner points.
    Mac,
    /// Downlink superposition with SIC at each receiver.
    NomaDl,
    /// Delay-offset uplink, both decoding orders plus the aligned baseline.
    Anoma,
    /// Downlink rate splitting (parameters via --config).
    RsmaDl,
    /// Uplink rate splitting, sweep of the split power.
    RsmaUl,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum NormalizationArg {
    /// Bits per second per Hertz of occupied real bandwidth.
    Real,
    /// Bits per complex symbol.
    Complex,
}

impl From<NormalizationArg> for RateNormalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::Real => RateNormalization::RealBandwidthNormalized,
            NormalizationArg::Complex => RateNormalization::ComplexPerSymbol,
        }
    }
}

#[derive(Args)]
struct RateRegionArgs {
    /// Which region to sweep.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Transmit power of user 1 (linear).
    #[arg(long)]
    power1: Option<f64>,
    /// Transmit power of user 2 (linear).
    #[arg(long)]
    power2: Option<f64>,
    /// Channel amplitude |h| of user 1.
    #[arg(long)]
    gain1: Option<f64>,
    /// Channel amplitude |h| of user 2.
    #[arg(long)]
    gain2: Option<f64>,
    /// Noise power (linear).
    #[arg(long)]
    sigma2: Option<f64>,
    /// Symbol-time offset of user 2 in [0, 1) (anoma).
    #[arg(long)]
    tau2: Option<f64>,
    /// Pulse roll-off in [0, 1] (anoma).
    #[arg(long)]
    beta: Option<f64>,
    /// Symbols per frame (anoma).
    #[arg(long)]
    frame_length: Option<usize>,
    /// Rate normalization (anoma).
    #[arg(long, value_enum)]
    normalization: Option<NormalizationArg>,
    /// Grid points of the split sweep (rsma-ul).
    #[arg(long)]
    points: Option<usize>,
    /// JSON file supplying any of the other parameters (required fields for
    /// rsma-dl: channels, common_precoder, private_precoders,
    /// common_shares as [re, im] nested arrays plus sigma2).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RateRegionFile {
    scheme: Option<String>,
    power1: Option<f64>,
    power2: Option<f64>,
    gain1: Option<f64>,
    gain2: Option<f64>,
    sigma2: Option<f64>,
    tau2: Option<f64>,
    beta: Option<f64>,
    frame_length: Option<usize>,
    normalization: Option<String>,
    points: Option<usize>,
    out: Option<PathBuf>,
    channels: Option<Vec<Vec<[f64; 2]>>>,
    common_precoder: Option<Vec<[f64; 2]>>,
    private_precoders: Option<Vec<Vec<[f64; 2]>>>,
    common_shares: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct RateRegionResolved {
    scheme: SchemeArg,
    power1: f64,
    power2: f64,
    gain1: f64,
    gain2: f64,
    sigma2: f64,
    tau2: f64,
    beta: f64,
    frame_length: usize,
    normalization: NormalizationArg,
    points: usize,
    out: PathBuf,
}

/// One `setting,user,rate` CSV body; users print 1-based, the sum row as
/// `sum`.
struct RateRows {
    rows: Vec<(String, String, f64)>,
}

impl RateRows {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn push_point(&mut self, setting: &str, point: &RatePoint) {
        for (k, &rate) in point.per_user.iter().enumerate() {
            self.rows.push((setting.to_string(), (k + 1).to_string(), rate));
        }
        self.rows.push((setting.to_string(), "sum".to_string(), point.sum));
    }

    fn push(&mut self, setting: &str, user: &str, rate: f64) {
        self.rows.push((setting.to_string(), user.to_string(), rate));
    }

    fn to_csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        writeln!(out, "setting,user,rate").expect("writing to memory cannot fail");
        for (setting, user, rate) in &self.rows {
            writeln!(out, "{setting},{user},{rate}").expect("writing to memory cannot fail");
        }
        out
    }
}

fn run_rate_region(args: RateRegionArgs) -> Result<(), CliError> {
    let file: RateRegionFile = load_json(args.config.as_ref())?;
    let scheme = match (args.scheme, file.scheme.as_deref()) {
        (Some(scheme), _) => scheme,
        (None, Some(text)) => enum_from_file(text, "scheme")?,
        (None, None) => return Err(CliError::invalid("missing --scheme")),
    };
    let normalization = match (args.normalization, file.normalization.as_deref()) {
        (Some(n), _) => n,
        (None, Some(text)) => enum_from_file(text, "normalization")?,
        (None, None) => NormalizationArg::Real,
    };
    let resolved = RateRegionResolved {
        scheme,
        power1: pick(args.power1, file.power1, 10.0),
        power2: pick(args.power2, file.power2, 2.0),
        gain1: pick(args.gain1, file.gain1, 1.0),
        gain2: pick(args.gain2, file.gain2, 1.0),
        sigma2: pick(args.sigma2, file.sigma2, 1.0),
        tau2: pick(args.tau2, file.tau2, 0.5),
        beta: pick(args.beta, file.beta, 0.5),
        frame_length: pick(args.frame_length, file.frame_length, 64),
        normalization,
        points: pick(args.points, file.points, 11),
        out: resolve_out(args.out.or(file.out), "rate_region.csv"),
    };
    echo_config(&resolved);
    let g1_sq = resolved.gain1 * resolved.gain1;
    let g2_sq = resolved.gain2 * resolved.gain2;
    let mut rows = RateRows::new();
    match resolved.scheme {
        SchemeArg::Mac => {
            let (vertex_a, vertex_b) = mac_region_vertices(
                resolved.power1,
                resolved.power2,
                g1_sq,
                g2_sq,
                resolved.sigma2,
            )
            .map_err(CliError::invalid)?;
            // Vertex A decodes user 2 first, leaving user 1 interference
            // free, and vice versa.
            rows.push_point("order=21", &vertex_a);
            rows.push_point("order=12", &vertex_b);
        }
        SchemeArg::NomaDl => {
            let point = noma_downlink_rates(
                &[resolved.power1, resolved.power2],
                &[g1_sq, g2_sq],
                resolved.sigma2,
            )
            .map_err(CliError::invalid)?;
            rows.push_point("downlink", &point);
        }
        SchemeArg::Anoma => {
            let pulse = PulseShape::new(resolved.beta).map_err(CliError::invalid)?;
            let gains = [
                Complex64::new(resolved.gain1, 0.0),
                Complex64::new(resolved.gain2, 0.0),
            ];
            let powers = [resolved.power1, resolved.power2];
            let offset = StackedModel::virtual_mimo(
                &gains,
                &powers,
                &[0.0, resolved.tau2],
                pulse,
                resolved.frame_length,
            )
            .map_err(CliError::invalid)?;
            let aligned = StackedModel::virtual_mimo(
                &gains,
                &powers,
                &[0.0, 0.0],
                pulse,
                resolved.frame_length,
            )
            .map_err(CliError::invalid)?;
            let norm: RateNormalization = resolved.normalization.into();
            let compute = |model: &StackedModel, order: &[usize]| {
                gaussian_rates(model, order, resolved.sigma2, norm)
                    .map(RatePoint::new)
                    .map_err(CliError::runtime)
            };
            let sync = compute(&aligned, &[1, 0])?;
            let order12 = compute(&offset, &[0, 1])?;
            let order21 = compute(&offset, &[1, 0])?;
            rows.push_point("sync", &sync);
            rows.push_point("order=12", &order12);
            rows.push_point("order=21", &order21);
        }
        SchemeArg::RsmaUl => {
            let sweep = rsma_uplink_split_sweep(
                resolved.power1,
                resolved.power2,
                g1_sq,
                g2_sq,
                resolved.sigma2,
                resolved.points,
            )
            .map_err(CliError::invalid)?;
            for (q, point) in &sweep {
                rows.push_point(&format!("q={q:.6}"), point);
            }
        }
        SchemeArg::RsmaDl => {
            let missing: Vec<&str> = [
                ("channels", file.channels.is_none()),
                ("common_precoder", file.common_precoder.is_none()),
                ("private_precoders", file.private_precoders.is_none()),
                ("common_shares", file.common_shares.is_none()),
            ]
            .iter()
            .filter(|(_, absent)| *absent)
            .map(|(name, _)| *name)
            .collect();
            if !missing.is_empty() {
                return Err(CliError::invalid(format!(
                    "rsma-dl needs these --config fields: {}",
                    missing.join(", ")
                )));
            }
            let channels = file.channels.expect("checked above");
            let cfg = RsmaDownlink::new(
                channels.iter().map(|v| complex_vector(v)).collect(),
                complex_vector(&file.common_precoder.expect("checked above")),
                file.private_precoders
                    .expect("checked above")
                    .iter()
                    .map(|v| complex_vector(v))
                    .collect(),
                file.common_shares.expect("checked above"),
                resolved.sigma2,
            )
            .map_err(CliError::invalid)?;
            let result = rsma_downlink_rates(&cfg);
            rows.push("common", "sum", result.common_rate);
            for (k, &rate) in result.private.iter().enumerate() {
                rows.push("private", &(k + 1).to_string(), rate);
            }
            let totals = RatePoint::new(result.totals);
            rows.push_point("total", &totals);
        }
    }
    write_file(&resolved.out, &rows.to_csv())?;
    println!("rows={} out={}", rows.rows.len(), resolved.out.display());
    Ok(())
}

fn complex_vector(values: &[[f64; 2]]) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&[re, im]| Complex64::new(re, im)),
    )
}

// ----------------------------------------------------------------- tcm-ber

#[derive(Args)]
struct TcmBerArgs {
    /// SNR grid point in dB (symbol energy over noise); repeat per point.
    #[arg(long = "snr", value_name = "DB")]
    snr: Vec<f64>,
    /// Payload trellis steps per frame.
    #[arg(long)]
    payload_steps: Option<usize>,
    /// Errors per user before a point stops.
    #[arg(long)]
    target_errors: Option<u64>,
    /// Trial cap per point.
    #[arg(long)]
    max_trials: Option<u64>,
    /// Master seed of the sweep.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file supplying any of the other parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TcmBerFile {
    snr_grid_db: Option<Vec<f64>>,
    payload_steps: Option<usize>,
    target_errors: Option<u64>,
    max_trials: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct TcmBerResolved {
    snr_grid_db: Vec<f64>,
    payload_steps: usize,
    target_errors: u64,
    max_trials: u64,
    seed: u64,
    out: PathBuf,
}

fn grid_of(flag: Vec<f64>, file: Option<Vec<f64>>, default: &[f64]) -> Vec<f64> {
    if !flag.is_empty() {
        flag
    } else {
        file.unwrap_or_else(|| default.to_vec())
    }
}

fn run_tcm_ber(args: TcmBerArgs) -> Result<(), CliError> {
    let file: TcmBerFile = load_json(args.config.as_ref())?;
    let resolved = TcmBerResolved {
        snr_grid_db: grid_of(args.snr, file.snr_grid_db, &[3.0, 4.0, 5.0, 6.0, 7.0, 8.0]),
        payload_steps: pick(args.payload_steps, file.payload_steps, 64),
        target_errors: pick(args.target_errors, file.target_errors, 100),
        max_trials: pick(args.max_trials, file.max_trials, 10_000_000),
        seed: pick(args.seed, file.seed, 1),
        out: resolve_out(args.out.or(file.out), "tcm_ber.csv"),
    };
    echo_config(&resolved);
    let coded = TcmScenario::new(Trellis::ungerboeck_4state_8psk(), resolved.payload_steps)
        .map_err(CliError::invalid)?;
    let config = SimConfig {
        snr_grid_db: resolved.snr_grid_db.clone(),
        max_trials: resolved.max_trials,
        target_errors: resolved.target_errors,
        master_seed: resolved.seed,
    };
    let coded_curve = run_ber(&coded, &config).map_err(CliError::invalid)?;
    // The uncoded reference runs at the same symbol energy over noise: its
    // Eb/N0 axis shifts by 10 log10(2) for the 2 bits QPSK carries.
    let shift = 10.0 * 2f64.log10();
    let uncoded_config = SimConfig {
        snr_grid_db: resolved.snr_grid_db.iter().map(|x| x - shift).collect(),
        ..config
    };
    let uncoded_curve =
        run_ber(&QpskAwgnScenario::new(), &uncoded_config).map_err(CliError::invalid)?;
    let mut csv = Vec::new();
    writeln!(csv, "snr_db,scheme,ber,errors,trials,ci95")
        .expect("writing to memory cannot fail");
    for (snr, (coded_point, uncoded_point)) in resolved
        .snr_grid_db
        .iter()
        .zip(coded_curve.points.iter().zip(&uncoded_curve.points))
    {
        for (scheme, point) in
            [("tcm-8psk", coded_point), ("qpsk", uncoded_point)]
        {
            let user = &point.users[0];
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                snr, scheme, user.ber, user.errors, point.trials, user.ci95
            )
            .expect("writing to memory cannot fail");
        }
    }
    write_file(&resolved.out, &csv)?;
    println!("points={} out={}", resolved.snr_grid_db.len(), resolved.out.display());
    Ok(())
}

// --------------------------------------------------------------------- ber

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ScenarioArg {
    /// Two uncoded users, successive cancellation receiver.
    NomaSic,
    /// Two uncoded users, joint nearest-point receiver.
    NomaMl,
    /// Single trellis-coded 8-PSK user.
    Tcm,
    /// Two coded users decoded jointly on the product trellis.
    TcnomaJoint,
    /// Two coded users decoded successively.
    TcnomaSic,
    /// Sparse-signature users with a linear MMSE separator.
    LdsMmse,
}

#[derive(Args)]
struct BerArgs {
    /// Which link to measure.
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    /// SNR grid point in dB; repeat per point. Scenario docs state the
    /// axis convention.
    #[arg(long = "snr", value_name = "DB")]
    snr: Vec<f64>,
    /// Constellation family of user 1 (noma scenarios).
    #[arg(long, value_enum)]
    kind1: Option<KindArg>,
    /// Points in user 1's constellation (noma scenarios).
    #[arg(long)]
    order1: Option<usize>,
    /// Constellation family of user 2 (noma scenarios).
    #[arg(long, value_enum)]
    kind2: Option<KindArg>,
    /// Points in user 2's constellation (noma scenarios).
    #[arg(long)]
    order2: Option<usize>,
    /// Power share of user 1 (noma scenarios).
    #[arg(long)]
    alpha: Option<f64>,
    /// Total transmit power (noma scenarios).
    #[arg(long)]
    total_power: Option<f64>,
    /// Power of coded user 1 (tcnoma scenarios).
    #[arg(long)]
    power1: Option<f64>,
    /// Power of coded user 2 (tcnoma scenarios).
    #[arg(long)]
    power2: Option<f64>,
    /// Rotation of user 2's constellation in radians (tcnoma scenarios).
    #[arg(long)]
    rotation: Option<f64>,
    /// Receiver channel amplitude |h|.
    #[arg(long)]
    gain: Option<f64>,
    /// Payload trellis steps per frame (coded scenarios).
    #[arg(long)]
    payload_steps: Option<usize>,
    /// Keep raw occupancy signatures instead of unit-energy columns
    /// (lds-mmse).
    #[arg(long)]
    raw_signatures: bool,
    /// Errors per user before a point stops.
    #[arg(long)]
    target_errors: Option<u64>,
    /// Trial cap per point.
    #[arg(long)]
    max_trials: Option<u64>,
    /// Master seed of the sweep.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file supplying any of the other parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BerFile {
    scenario: Option<String>,
    snr_grid_db: Option<Vec<f64>>,
    kind1: Option<String>,
    order1: Option<usize>,
    kind2: Option<String>,
    order2: Option<usize>,
    alpha: Option<f64>,
    total_power: Option<f64>,
    power1: Option<f64>,
    power2: Option<f64>,
    rotation: Option<f64>,
    gain: Option<f64>,
    payload_steps: Option<usize>,
    raw_signatures: Option<bool>,
    target_errors: Option<u64>,
    max_trials: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct BerResolved {
    scenario: ScenarioArg,
    snr_grid_db: Vec<f64>,
    kind1: KindArg,
    order1: usize,
    kind2: KindArg,
    order2: usize,
    alpha: f64,
    total_power: f64,
    power1: f64,
    power2: f64,
    rotation: f64,
    gain: f64,
    payload_steps: usize,
    raw_signatures: bool,
    target_errors: u64,
    max_trials: u64,
    seed: u64,
    out: PathBuf,
}

fn run_ber_command(args: BerArgs) -> Result<(), CliError> {
    let file: BerFile = load_json(args.config.as_ref())?;
    let scenario = match (args.scenario, file.scenario.as_deref()) {
        (Some(s), _) => s,
        (None, Some(text)) => enum_from_file(text, "scenario")?,
        (None, None) => return Err(CliError::invalid("missing --scenario")),
    };
    let resolved = BerResolved {
        scenario,
        snr_grid_db: grid_of(args.snr, file.snr_grid_db, &[0.0, 2.0, 4.0, 6.0, 8.0, 10.0]),
        kind1: kind_of(args.kind1, file.kind1)?,
        order1: pick(args.order1, file.order1, 4),
        kind2: kind_of(args.kind2, file.kind2)?,
        order2: pick(args.order2, file.order2, 4),
        alpha: pick(args.alpha, file.alpha, 0.2),
        total_power: pick(args.total_power, file.total_power, 1.0),
        power1: pick(args.power1, file.power1, 0.2),
        power2: pick(args.power2, file.power2, 0.8),
        rotation: pick(
            args.rotation,
            file.rotation,
            std::f64::consts::PI / 8.0,
        ),
        gain: pick(args.gain, file.gain, 1.0),
        payload_steps: pick(args.payload_steps, file.payload_steps, 64),
        raw_signatures: args.raw_signatures || file.raw_signatures.unwrap_or(false),
        target_errors: pick(args.target_errors, file.target_errors, 100),
        max_trials: pick(args.max_trials, file.max_trials, 10_000_000),
        seed: pick(args.seed, file.seed, 1),
        out: resolve_out(args.out.or(file.out), "ber.csv"),
    };
    echo_config(&resolved);
    let config = SimConfig {
        snr_grid_db: resolved.snr_grid_db.clone(),
        max_trials: resolved.max_trials,
        target_errors: resolved.target_errors,
        master_seed: resolved.seed,
    };
    let gain = Complex64::new(resolved.gain, 0.0);
    let curve = match resolved.scenario {
        ScenarioArg::NomaSic | ScenarioArg::NomaMl => {
            let detector = if resolved.scenario == ScenarioArg::NomaSic {
                PairDetector::Sic
            } else {
                PairDetector::Ml
            };
            let fine = Constellation::standard(resolved.kind1.into(), resolved.order1)
                .map_err(CliError::invalid)?;
            let coarse = Constellation::standard(resolved.kind2.into(), resolved.order2)
                .map_err(CliError::invalid)?;
            let split = PowerSplit::new(resolved.alpha, resolved.total_power)
                .map_err(CliError::invalid)?;
            run_curve(&NomaPairScenario::new(fine, coarse, split, gain, detector), &config)?
        }
        ScenarioArg::Tcm => {
            let scenario =
                TcmScenario::new(Trellis::ungerboeck_4state_8psk(), resolved.payload_steps)
                    .map_err(CliError::invalid)?;
            run_curve(&scenario, &config)?
        }
        ScenarioArg::TcnomaJoint | ScenarioArg::TcnomaSic => {
            let decoder = if resolved.scenario == ScenarioArg::TcnomaJoint {
                TcDecoder::Joint
            } else {
                TcDecoder::Sic
            };
            let scenario = TcNomaScenario::new(
                Trellis::ungerboeck_4state_8psk(),
                Trellis::ungerboeck_4state_8psk(),
                resolved.power1,
                resolved.power2,
                resolved.payload_steps,
                decoder,
            )
            .with_rotation(resolved.rotation)
            .with_gain(gain);
            run_curve(&scenario, &config)?
        }
        ScenarioArg::LdsMmse => {
            let matrix = if resolved.raw_signatures {
                SignatureMatrix::lds_6x9()
            } else {
                SignatureMatrix::lds_6x9().normalized_columns()
            };
            run_curve(&LdsScenario::new(matrix), &config)?
        }
    };
    let mut csv = Vec::new();
    curve.write_csv(&mut csv).map_err(CliError::runtime)?;
    write_file(&resolved.out, &csv)?;
    println!("points={} out={}", curve.points.len(), resolved.out.display());
    Ok(())
}

fn run_curve<S: Scenario>(scenario: &S, config: &SimConfig) -> Result<BerCurve, CliError> {
    run_ber(scenario, config).map_err(CliError::invalid)
}
