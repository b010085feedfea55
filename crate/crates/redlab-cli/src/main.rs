//! Command-line front end for the reduction pipeline.
//!
//! Exit codes: 0 = property verified / verdict produced, 1 = verified
//! false (a violation or separating witness was found), 2 = inconclusive
//! within the given bounds, 3 = input error.

use clap::{Parser, Subcommand, ValueEnum};
use redlab::alphabet::{format_bits, parse_bits, Bit};
use redlab::nds::{nds_to_dot, Nds};
use redlab::pcp::{self, IndexSequence, PcpInstance, Side};
use redlab::product;
use redlab::regular::{FiniteSubstitution, Nfa};
use redlab::relation::{Relation, Transducer};
use redlab::subs::{self, Verdict};
use redlab::zt::{compile_relation, Coding, ZTransducer};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_FALSE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "redlab", version, about = "finite-transducer reduction laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// PCP instances: bounded solving, witnesses, claim scans.
    #[command(subcommand)]
    Pcp(PcpCommand),
    /// Z-transducers: coded machines and runs.
    #[command(subcommand)]
    Zt(ZtCommand),
    /// Defense systems: attack probabilities and critical-word search.
    #[command(subcommand)]
    Nds(NdsCommand),
    /// Reductions between the stages.
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// Finite-substitution equivalence on b{0,1}*c.
    #[command(subcommand)]
    Subs(SubsCommand),
    /// Re-emit a file as DOT or normalized text.
    Export {
        format: ExportFormat,
        file: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum PcpCommand {
    /// Search for the shortlex-minimal solution up to a length bound.
    Solve {
        file: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
    /// Check the per-word membership characterization within bounds.
    Scan {
        file: PathBuf,
        #[arg(long)]
        max_seq: usize,
        #[arg(long)]
        max_word: usize,
    },
    /// Build the canonical L0 witness of a solution sequence and test it
    /// against L0, Lu and Lv.
    Witness {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        seq: Vec<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ChiSide {
    U,
    V,
    L0,
}

#[derive(Subcommand)]
enum ZtCommand {
    /// Compile the coded relation of one side (or the deterministic
    /// machine for the coded L0) of a PCP instance.
    BuildChi {
        file: PathBuf,
        #[arg(long, value_enum)]
        side: ChiSide,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print the output-count set of a machine on a word.
    Run {
        file: PathBuf,
        #[arg(long)]
        word: String,
    },
}

#[derive(Subcommand)]
enum NdsCommand {
    /// Search for the shortlex-minimal critical word up to a length bound.
    Search {
        file: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
    /// Print the exact configuration distribution after an attack word.
    Prob {
        file: PathBuf,
        #[arg(long)]
        word: String,
    },
}

#[derive(Subcommand)]
enum ReduceCommand {
    /// Build the product defense system of a deterministic machine C and a
    /// complete machine D.
    ZtToNds {
        c: PathBuf,
        d: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run both directions of the correspondence between counterexamples
    /// and critical words, within a bound.
    Check {
        c: PathBuf,
        d: PathBuf,
        #[arg(long)]
        bound: usize,
    },
    /// Emit the substitution pair of a defense system.
    NdsToSubs {
        file: PathBuf,
        #[arg(short, long, num_args = 2, value_names = ["PHI", "XI"])]
        out: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SubsCommand {
    /// Decide whether the two images coincide on b{0,1}*c.
    Decide { file: PathBuf },
    /// Check the carrier-word witness for a given critical word.
    Witness {
        file: PathBuf,
        #[arg(long)]
        critical: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Text,
}

struct CliError {
    message: String,
}

impl CliError {
    fn new(message: impl Into<String>) -> CliError {
        CliError { message: message.into() }
    }

    fn in_file(path: &Path, err: impl fmt::Display) -> CliError {
        CliError { message: format!("{}: {}", path.display(), err) }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::in_file(path, e))
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::in_file(path, e))
}

fn read_instance(path: &Path) -> Result<PcpInstance, CliError> {
    PcpInstance::from_text(&read(path)?).map_err(|e| CliError::in_file(path, e))
}

fn read_zt(path: &Path) -> Result<ZTransducer, CliError> {
    ZTransducer::from_text(&read(path)?).map_err(|e| CliError::in_file(path, e))
}

fn read_nds(path: &Path) -> Result<Nds, CliError> {
    Nds::from_text(&read(path)?).map_err(|e| CliError::in_file(path, e))
}

fn read_word(word: &str) -> Result<Vec<Bit>, CliError> {
    parse_bits(word).map_err(|e| CliError::new(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Pcp(cmd) => run_pcp(cmd),
        Command::Zt(cmd) => run_zt(cmd),
        Command::Nds(cmd) => run_nds(cmd),
        Command::Reduce(cmd) => run_reduce(cmd),
        Command::Subs(cmd) => run_subs(cmd),
        Command::Export { format, file, out } => run_export(format, &file, &out),
    }
}

fn run_pcp(cmd: PcpCommand) -> Result<u8, CliError> {
    match cmd {
        PcpCommand::Solve { file, max_len } => {
            let inst = read_instance(&file)?;
            println!("pairs {} max-len {}", inst.len(), max_len);
            match pcp::brute_force(&inst, max_len) {
                Some(seq) => {
                    println!("solution {seq}");
                    Ok(EXIT_OK)
                }
                None => {
                    println!("no solution within length {max_len}");
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        PcpCommand::Scan { file, max_seq, max_word } => {
            let inst = read_instance(&file)?;
            println!("pairs {} max-seq {} max-word {}", inst.len(), max_seq, max_word);
            let violations =
                pcp::scan_claim(&inst, max_seq, max_word).map_err(|e| CliError::in_file(&file, e))?;
            println!("violations {}", violations.len());
            for v in &violations {
                println!("violation {v}");
            }
            Ok(if violations.is_empty() { EXIT_OK } else { EXIT_FALSE })
        }
        PcpCommand::Witness { file, seq } => {
            let inst = read_instance(&file)?;
            let seq = IndexSequence::new(seq, &inst).map_err(|e| CliError::new(e.to_string()))?;
            match pcp::solution_witness(&inst, &seq) {
                Err(e) => {
                    println!("{e}");
                    Ok(EXIT_FALSE)
                }
                Ok(witness) => {
                    let l0 = pcp::build_l0(&inst);
                    let lu = pcp::build_side(&inst, Side::U)
                        .map_err(|e| CliError::in_file(&file, e))?
                        .l_side;
                    let lv = pcp::build_side(&inst, Side::V)
                        .map_err(|e| CliError::in_file(&file, e))?
                        .l_side;
                    let (in_l0, in_lu, in_lv) =
                        (l0.contains(&witness), lu.contains(&witness), lv.contains(&witness));
                    println!("witness {witness}");
                    println!("L0 {in_l0}");
                    println!("Lu {in_lu}");
                    println!("Lv {in_lv}");
                    Ok(if in_l0 && !in_lu && !in_lv { EXIT_OK } else { EXIT_FALSE })
                }
            }
        }
    }
}

fn run_zt(cmd: ZtCommand) -> Result<u8, CliError> {
    match cmd {
        ZtCommand::BuildChi { file, side, out } => {
            let inst = read_instance(&file)?;
            let coding = Coding::for_instance(&inst);
            let machine = match side {
                ChiSide::L0 => redlab::zt::build_chi_l0(&inst),
                ChiSide::U | ChiSide::V => {
                    let s = if matches!(side, ChiSide::U) { Side::U } else { Side::V };
                    let rel: Relation = pcp::build_side(&inst, s)
                        .map_err(|e| CliError::in_file(&file, e))?
                        .l_side;
                    compile_relation(&coding, &rel).map_err(|e| CliError::new(e.to_string()))?
                }
            };
            write(&out, &machine.to_text())?;
            let analysis = machine.analyze();
            println!(
                "k {} states {} transitions {} deterministic {} complete {}",
                coding.k,
                machine.state_count(),
                machine.transitions().len(),
                analysis.deterministic,
                analysis.complete
            );
            Ok(EXIT_OK)
        }
        ZtCommand::Run { file, word } => {
            let machine = read_zt(&file)?;
            let word = read_word(&word)?;
            let outputs = machine.outputs(&word);
            if outputs.is_empty() {
                println!("outputs -");
            } else {
                let counts: Vec<String> = outputs.iter().map(|c| c.to_string()).collect();
                println!("outputs {}", counts.join(" "));
            }
            Ok(EXIT_OK)
        }
    }
}

fn run_nds(cmd: NdsCommand) -> Result<u8, CliError> {
    match cmd {
        NdsCommand::Search { file, max_len } => {
            let nds = read_nds(&file)?;
            println!("lines {} max-len {}", nds.lines(), max_len);
            match nds.search_critical(max_len) {
                Some(word) => {
                    println!("critical {}", format_bits(&word));
                    Ok(EXIT_OK)
                }
                None => {
                    println!("no critical word within length {max_len}");
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        NdsCommand::Prob { file, word } => {
            let nds = read_nds(&file)?;
            let word = read_word(&word)?;
            let dist = nds.attack_probabilities(&word);
            for (cfg, mass) in &dist {
                println!("p {} {} {}/{}", cfg.node, cfg.line, mass.numer(), mass.denom());
            }
            Ok(EXIT_OK)
        }
    }
}

fn run_reduce(cmd: ReduceCommand) -> Result<u8, CliError> {
    match cmd {
        ReduceCommand::ZtToNds { c, d, out } => {
            let mc = read_zt(&c)?;
            let md = read_zt(&d)?;
            let reduction =
                product::build_product_nds(&mc, &md).map_err(|e| CliError::new(e.to_string()))?;
            write(&out, &reduction.nds.to_text())?;
            println!(
                "lines {} rules {} c-states {} d-prime-states {}",
                reduction.nds.lines(),
                reduction.nds.rules().len(),
                reduction.c_state_count,
                reduction.d_prime.state_count()
            );
            Ok(EXIT_OK)
        }
        ReduceCommand::Check { c, d, bound } => {
            let mc = read_zt(&c)?;
            let md = read_zt(&d)?;
            let report = product::check_correspondence(&mc, &md, bound)
                .map_err(|e| CliError::new(e.to_string()))?;
            print!("{report}");
            Ok(match report.conclusion {
                product::Conclusion::InclusionFails if report.assertions_hold() => EXIT_OK,
                product::Conclusion::InclusionFails => EXIT_FALSE,
                product::Conclusion::ConsistentWithinBounds => EXIT_INCONCLUSIVE,
            })
        }
        ReduceCommand::NdsToSubs { file, out } => {
            let nds = read_nds(&file)?;
            let (phi, xi) =
                subs::build_substitutions(&nds).map_err(|e| CliError::new(e.to_string()))?;
            write(&out[0], &phi.to_text())?;
            write(&out[1], &xi.to_text())?;
            println!(
                "lines {} phi-words {} xi-words {}",
                nds.lines(),
                phi.domain().map(|l| phi.image(l).unwrap().len()).sum::<usize>(),
                xi.domain().map(|l| xi.image(l).unwrap().len()).sum::<usize>()
            );
            Ok(EXIT_OK)
        }
    }
}

fn run_subs(cmd: SubsCommand) -> Result<u8, CliError> {
    match cmd {
        SubsCommand::Decide { file } => {
            let nds = read_nds(&file)?;
            let outcome =
                subs::decide_equivalence(&nds).map_err(|e| CliError::new(e.to_string()))?;
            if !outcome.xi_included_in_phi {
                println!("internal inconsistency: xi image not included in phi image");
                return Ok(EXIT_FALSE);
            }
            // consistency probe: a short bounded criticality search
            let probe = nds.search_critical(6);
            println!("{}", outcome.verdict);
            match &probe {
                Some(w) => println!("probe critical {}", format_bits(w)),
                None => println!("probe no critical word within length 6"),
            }
            Ok(match outcome.verdict {
                Verdict::Equal => EXIT_OK,
                Verdict::NotEqual { .. } => EXIT_FALSE,
            })
        }
        SubsCommand::Witness { file, critical } => {
            let nds = read_nds(&file)?;
            let word = read_word(&critical)?;
            match subs::critical_witness(&nds, &word) {
                Err(e) => Err(CliError::new(e.to_string())),
                Ok(report) => {
                    println!("witness w^{}", 2 * word.len() + 2);
                    println!("in-phi {}", report.in_phi);
                    println!("in-xi {}", report.in_xi);
                    println!("factorization {}", report.phi_factorization.join(" "));
                    Ok(if report.in_phi && !report.in_xi { EXIT_OK } else { EXIT_FALSE })
                }
            }
        }
    }
}

fn run_export(format: ExportFormat, file: &Path, out: &Path) -> Result<u8, CliError> {
    let ext = file.extension().and_then(|e| e.to_str()).unwrap_or("");
    let content = match (format, ext) {
        (ExportFormat::Dot, "ft") => Transducer::from_text(&read(file)?)
            .map_err(|e| CliError::in_file(file, e))?
            .to_dot(),
        (ExportFormat::Dot, "zt") => read_zt(file)?.to_dot(),
        (ExportFormat::Dot, "nfa") => Nfa::from_text(&read(file)?)
            .map_err(|e| CliError::in_file(file, e))?
            .to_dot(),
        (ExportFormat::Dot, "nds") => nds_to_dot(&read_nds(file)?),
        (ExportFormat::Text, "ft") => Transducer::from_text(&read(file)?)
            .map_err(|e| CliError::in_file(file, e))?
            .to_text(),
        (ExportFormat::Text, "zt") => read_zt(file)?.to_text(),
        (ExportFormat::Text, "nfa") => Nfa::from_text(&read(file)?)
            .map_err(|e| CliError::in_file(file, e))?
            .to_text(),
        (ExportFormat::Text, "nds") => read_nds(file)?.to_text(),
        (ExportFormat::Text, "pcp") => read_instance(file)?.to_text(),
        (ExportFormat::Text, "sub") => FiniteSubstitution::from_text(&read(file)?)
            .map_err(|e| CliError::in_file(file, e))?
            .to_text(),
        (ExportFormat::Dot, other) => {
            return Err(CliError::new(format!(
                "no DOT rendering for `.{other}` files (expected .ft, .zt, .nfa or .nds)"
            )))
        }
        (ExportFormat::Text, other) => {
            return Err(CliError::new(format!(
                "unknown file type `.{other}` (expected .ft, .zt, .nfa, .nds, .pcp or .sub)"
            )))
        }
    };
    write(out, &content)?;
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}
