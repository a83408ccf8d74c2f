//! The `mbat` command line.
//!
//! Failures print one line to stderr, `mbat: error[<kind>]: <message>`, and
//! exit with the code for that kind (see [`ExitKind`]).

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::codebook::Codebook;
use crate::error::{check_dim, Error, Result};
use crate::json::{EncodingConfig, Encoder, JsonValue, StringOrder};
use crate::memory::{probe_role, VectorIndex};
use crate::sim::{capacity_run, drift_run, CapacityParams, CapacityReport, DriftParams, DriftReport, MatrixKind};
use crate::vsa::{EntryKind, HyperVector, SpaceConfig};
use crate::wire::{vector_from_bytes, vector_to_bytes};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  internal error
  2  usage error (unknown subcommand, bad flags)
  3  I/O error
  4  malformed input file (bad magic, version, truncation, invalid JSON)
  5  dimension mismatch between codebook, index and vectors
  6  invalid value (config, parameters, duplicate ids or keys)";

/// Failure classes and their process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Internal = 1,
    Usage = 2,
    Io = 3,
    Format = 4,
    Dimension = 5,
    Invalid = 6,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn label(self) -> &'static str {
        match self {
            ExitKind::Internal => "internal",
            ExitKind::Usage => "usage",
            ExitKind::Io => "io",
            ExitKind::Format => "format",
            ExitKind::Dimension => "dimension",
            ExitKind::Invalid => "invalid",
        }
    }

    pub fn of(err: &Error) -> Self {
        match err {
            Error::Io(_) => ExitKind::Io,
            Error::BadMagic | Error::Version(_) | Error::Truncated | Error::Malformed(_) | Error::Json(_) => {
                ExitKind::Format
            }
            Error::DimensionMismatch { .. } => ExitKind::Dimension,
            Error::NonFinite(_)
            | Error::InvalidSpace(_)
            | Error::NotOrthogonal { .. }
            | Error::EmptyName
            | Error::DuplicateKey(_)
            | Error::DuplicateId(_)
            | Error::NonFiniteNumber(_)
            | Error::Config(_)
            | Error::InvalidParams(_) => ExitKind::Invalid,
            Error::Orthogonalization { .. } => ExitKind::Internal,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mbat", version, about = "Orthogonal-matrix VSA: encode JSON, search, simulate", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create, extend or inspect a codebook file
    #[command(subcommand)]
    Codebook(CodebookCmd),
    /// Encode one JSON document to a vector
    Encode(EncodeArgs),
    /// Build, extend or inspect a vector index
    #[command(subcommand)]
    Index(IndexCmd),
    /// Cosine k-nearest-neighbor search
    Query(QueryArgs),
    /// Rank candidate texts by presence under a role in a document
    ProbeRole(ProbeRoleArgs),
    /// Monte Carlo harnesses
    #[command(subcommand)]
    Simulate(SimulateCmd),
}

#[derive(Debug, Subcommand)]
enum CodebookCmd {
    Init {
        #[arg(long, default_value_t = crate::vsa::DEFAULT_DIMENSION)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EntryKindArg::GaussianUnit)]
        entry_kind: EntryKindArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Import word vectors from a text table (`word x1 … xn` per line)
    Import {
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        table: PathBuf,
        /// Keep imported vectors as given instead of normalizing them
        #[arg(long)]
        verbatim: bool,
        #[arg(long)]
        out: PathBuf,
    },
    Info {
        #[arg(long)]
        codebook: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EntryKindArg {
    GaussianUnit,
    SignedBinary,
}

impl From<EntryKindArg> for EntryKind {
    fn from(k: EntryKindArg) -> Self {
        match k {
            EntryKindArg::GaussianUnit => EntryKind::GaussianUnit,
            EntryKindArg::SignedBinary => EntryKind::SignedBinary,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VectorFormat {
    Binary,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct EncoderArgs {
    #[arg(long)]
    codebook: PathBuf,
    /// Encoding config (JSON); defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[command(flatten)]
    encoder: EncoderArgs,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = VectorFormat::Binary)]
    format: VectorFormat,
}

#[derive(Debug, Subcommand)]
enum IndexCmd {
    /// Encode documents into a new index; ids are file stems
    Build {
        #[command(flatten)]
        encoder: EncoderArgs,
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode one document and add it to an existing index
    Add {
        #[arg(long)]
        index: PathBuf,
        #[command(flatten)]
        encoder: EncoderArgs,
        #[arg(long = "in")]
        input: PathBuf,
        /// Record id; defaults to the file stem
        #[arg(long)]
        id: Option<String>,
        /// Output path; defaults to rewriting --index
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Info {
        #[arg(long)]
        index: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(id = "probe", required = true, multiple = false)]
struct ProbeSource {
    /// JSON document to encode (needs --codebook)
    #[arg(long = "in", group = "probe")]
    input: Option<PathBuf>,
    /// Pre-encoded raw vector file
    #[arg(long, group = "probe")]
    vector: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    #[command(flatten)]
    source: ProbeSource,
    #[arg(long)]
    codebook: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct ProbeRoleArgs {
    #[command(flatten)]
    encoder: EncoderArgs,
    #[command(flatten)]
    source: ProbeSource,
    #[arg(long)]
    role: String,
    /// Candidate text, encoded as a string value; repeatable
    #[arg(long = "candidate", required = true)]
    candidates: Vec<String>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
}

#[derive(Debug, Subcommand)]
enum SimulateCmd {
    /// Bundle capacity: members versus random distractors
    Capacity {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        members: usize,
        #[arg(long)]
        distractors: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EntryKindArg::SignedBinary)]
        entry_kind: EntryKindArg,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
    /// Norm drift along chains of random matrices
    Drift {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum)]
        matrix_kind: MatrixKindArg,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Do not scale Gaussian entries by 1/√n
        #[arg(long)]
        unscaled: bool,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MatrixKindArg {
    RandomGaussian,
    RandomOrthogonal,
}

#[derive(Serialize)]
struct Hit<'a> {
    id: &'a str,
    cosine: f64,
}

#[derive(Serialize)]
struct RoleHit<'a> {
    id: &'a str,
    score: f64,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.kind().as_str().unwrap_or("bad arguments");
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(err, "mbat: error[usage]: {msg}: {first}");
            return ExitKind::Usage.code();
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let kind = ExitKind::of(&e);
            let line = e.to_string().replace('\n', " ");
            let _ = writeln!(err, "mbat: error[{}]: {line}", kind.label());
            kind.code()
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_codebook(path: &Path) -> Result<Codebook> {
    Codebook::from_bytes(&read(path)?)
}

fn load_config(path: Option<&Path>) -> Result<EncodingConfig> {
    match path {
        Some(p) => {
            let text = String::from_utf8(read(p)?).map_err(|e| Error::Config(e.to_string()))?;
            EncodingConfig::from_json(&text)
        }
        None => Ok(EncodingConfig::default()),
    }
}

fn read_json(path: &Path) -> Result<JsonValue> {
    JsonValue::from_slice(&read(path)?)
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::InvalidParams(format!("cannot derive an id from {}", path.display())))
}

fn read_vector(path: &Path, dim: usize) -> Result<HyperVector> {
    let v = vector_from_bytes(&read(path)?)?;
    check_dim(dim, v.len())?;
    HyperVector::new(v)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Codebook(c) => codebook_cmd(c, out),
        Command::Encode(a) => {
            let book = load_codebook(&a.encoder.codebook)?;
            let cfg = load_config(a.encoder.config.as_deref())?;
            let doc = read_json(&a.input)?;
            let v = Encoder::new(&book, &cfg).encode_value(&doc)?;
            let bytes = match a.format {
                VectorFormat::Binary => vector_to_bytes(v.as_slice()),
                VectorFormat::Json => {
                    let mut s = serde_json::to_vec(v.as_slice())?;
                    s.push(b'\n');
                    s
                }
            };
            write_file(&a.out, &bytes)
        }
        Command::Index(c) => index_cmd(c, out),
        Command::Query(a) => query_cmd(a, out),
        Command::ProbeRole(a) => probe_role_cmd(a, out),
        Command::Simulate(c) => simulate_cmd(c, out),
    }
}

fn codebook_cmd(cmd: CodebookCmd, out: &mut dyn Write) -> Result<()> {
    match cmd {
        CodebookCmd::Init {
            dim,
            seed,
            entry_kind,
            out: path,
        } => {
            let space = SpaceConfig::new(dim, seed)?.with_entry_kind(entry_kind.into());
            write_file(&path, &Codebook::new(space)?.to_bytes()?)
        }
        CodebookCmd::Import {
            codebook,
            table,
            verbatim,
            out: path,
        } => {
            let mut book = load_codebook(&codebook)?;
            let file = fs::File::open(&table)
                .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", table.display()))))?;
            let count = book.import_table(BufReader::new(file), verbatim)?;
            write_file(&path, &book.to_bytes()?)?;
            writeln!(out, "{}", serde_json::json!({ "imported": count }))?;
            Ok(())
        }
        CodebookCmd::Info { codebook } => {
            let book = load_codebook(&codebook)?;
            let s = book.space();
            let info = serde_json::json!({
                "dimension": s.dimension,
                "master_seed": s.master_seed,
                "entry_kind": s.entry_kind,
                "imported_symbols": book.imported_symbol_count(),
                "imported_roles": book.imported_role_count(),
                "imported_literals": book.imported_literal_count(),
            });
            writeln!(out, "{info}")?;
            Ok(())
        }
    }
}

fn index_cmd(cmd: IndexCmd, out: &mut dyn Write) -> Result<()> {
    match cmd {
        IndexCmd::Build {
            encoder,
            inputs,
            out: path,
        } => {
            let book = load_codebook(&encoder.codebook)?;
            let cfg = load_config(encoder.config.as_deref())?;
            let enc = Encoder::new(&book, &cfg);
            let mut index = VectorIndex::new(book.dimension());
            for input in &inputs {
                let id = stem(input)?;
                index.add(&id, enc.encode_value(&read_json(input)?)?)?;
            }
            write_file(&path, &index.to_bytes()?)
        }
        IndexCmd::Add {
            index: index_path,
            encoder,
            input,
            id,
            out: path,
        } => {
            let book = load_codebook(&encoder.codebook)?;
            let mut index = VectorIndex::load(&read(&index_path)?, book.dimension())?;
            let cfg = load_config(encoder.config.as_deref())?;
            let id = match id {
                Some(id) => id,
                None => stem(&input)?,
            };
            let v = Encoder::new(&book, &cfg).encode_value(&read_json(&input)?)?;
            index.add(&id, v)?;
            write_file(path.as_deref().unwrap_or(&index_path), &index.to_bytes()?)
        }
        IndexCmd::Info { index } => {
            let index = VectorIndex::from_bytes(&read(&index)?)?;
            let ids: Vec<&str> = index.records().iter().map(|r| r.id.as_str()).collect();
            let info = serde_json::json!({
                "dimension": index.dimension(),
                "records": index.len(),
                "ids": ids,
            });
            writeln!(out, "{info}")?;
            Ok(())
        }
    }
}

/// Loads or encodes the probe vector, checking dimensions against `dim`
/// before encoding.
fn probe_vector(source: &ProbeSource, book: Option<&Codebook>, cfg: &EncodingConfig, dim: usize) -> Result<HyperVector> {
    if let Some(path) = &source.vector {
        return read_vector(path, dim);
    }
    let path = source.input.as_ref().expect("clap enforces one probe source");
    let book = book.ok_or_else(|| Error::InvalidParams("--in needs --codebook to encode the document".into()))?;
    check_dim(dim, book.dimension())?;
    Encoder::new(book, cfg).encode_value(&read_json(path)?)
}

fn query_cmd(a: QueryArgs, out: &mut dyn Write) -> Result<()> {
    let index = VectorIndex::from_bytes(&read(&a.index)?)?;
    let book = a.codebook.as_deref().map(load_codebook).transpose()?;
    if let Some(b) = &book {
        check_dim(index.dimension(), b.dimension())?;
    }
    let cfg = load_config(a.config.as_deref())?;
    let q = probe_vector(&a.source, book.as_ref(), &cfg, index.dimension())?;
    let hits = index.knn(&q, a.k)?;
    match a.format {
        ReportFormat::Json => {
            let rows: Vec<Hit<'_>> = hits
                .iter()
                .map(|h| Hit {
                    id: &h.id,
                    cosine: h.score,
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string(&rows)?)?;
        }
        ReportFormat::Csv => {
            writeln!(out, "id,cosine")?;
            for h in &hits {
                writeln!(out, "{},{}", csv_field(&h.id), h.score)?;
            }
        }
    }
    Ok(())
}

fn probe_role_cmd(a: ProbeRoleArgs, out: &mut dyn Write) -> Result<()> {
    let book = load_codebook(&a.encoder.codebook)?;
    let cfg = load_config(a.encoder.config.as_deref())?;
    let doc = probe_vector(&a.source, Some(&book), &cfg, book.dimension())?;
    let enc = Encoder::new(&book, &cfg);
    let cands = a
        .candidates
        .iter()
        .map(|c| Ok((c.as_str(), enc.encode_string(c, StringOrder::Bag)?)))
        .collect::<Result<Vec<_>>>()?;
    let ranked = probe_role(&doc, &a.role, cands.iter().map(|(id, v)| (*id, v)), &book)?;
    match a.format {
        ReportFormat::Json => {
            let rows: Vec<RoleHit<'_>> = ranked
                .iter()
                .map(|h| RoleHit {
                    id: &h.id,
                    score: h.score,
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string(&rows)?)?;
        }
        ReportFormat::Csv => {
            writeln!(out, "id,score")?;
            for h in &ranked {
                writeln!(out, "{},{}", csv_field(&h.id), h.score)?;
            }
        }
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn simulate_cmd(cmd: SimulateCmd, out: &mut dyn Write) -> Result<()> {
    match cmd {
        SimulateCmd::Capacity {
            dim,
            members,
            distractors,
            trials,
            seed,
            entry_kind,
            format,
        } => {
            let report = capacity_run(&CapacityParams {
                dimension: dim,
                members,
                distractors,
                trials,
                entry_kind: entry_kind.into(),
                seed,
            })?;
            match format {
                ReportFormat::Json => writeln!(out, "{}", serde_json::to_string(&report)?)?,
                ReportFormat::Csv => writeln!(out, "{}\n{}", CapacityReport::CSV_HEADER, report.csv_row())?,
            }
        }
        SimulateCmd::Drift {
            dim,
            depth,
            matrix_kind,
            trials,
            seed,
            unscaled,
            format,
        } => {
            let report = drift_run(&DriftParams {
                dimension: dim,
                depth,
                matrix_kind: match matrix_kind {
                    MatrixKindArg::RandomGaussian => MatrixKind::RandomGaussian,
                    MatrixKindArg::RandomOrthogonal => MatrixKind::RandomOrthogonal,
                },
                trials,
                seed,
                unscaled,
            })?;
            match format {
                ReportFormat::Json => writeln!(out, "{}", serde_json::to_string(&report)?)?,
                ReportFormat::Csv => {
                    writeln!(out, "{}", DriftReport::CSV_HEADER)?;
                    for row in report.csv_rows() {
                        writeln!(out, "{row}")?;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("mbat").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_are_one_line() {
        let (code, _, err) = run_capture(&["frobnicate"]);
        assert_eq!(code, 2);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("mbat: error[usage]:"));
        let (code, _, _) = run_capture(&["encode", "--codebook", "x"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn help_succeeds_and_lists_exit_codes() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("Exit codes"));
    }

    #[test]
    fn missing_file_is_io() {
        let (code, _, err) = run_capture(&["codebook", "info", "--codebook", "/nonexistent/cb.mbat"]);
        assert_eq!(code, 3);
        assert!(err.starts_with("mbat: error[io]:"));
    }

    #[test]
    fn exit_kinds() {
        assert_eq!(ExitKind::of(&Error::BadMagic).code(), 4);
        assert_eq!(ExitKind::of(&Error::DimensionMismatch { expected: 1, found: 2 }).code(), 5);
        assert_eq!(ExitKind::of(&Error::DuplicateId("a".into())).code(), 6);
    }

    #[test]
    fn simulate_csv() {
        let (code, out, _) = run_capture(&[
            "simulate", "capacity", "--dim", "32", "--members", "2", "--distractors", "5", "--trials", "4", "--seed",
            "1", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines[0], CapacityReport::CSV_HEADER);
        assert_eq!(lines.len(), 2);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
