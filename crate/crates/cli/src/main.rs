//! Command-line front door for the Stallings subgroup calculus.
//!
//! Exit status: 0 on success, 1 on a negative decision (non-member, not
//! conjugate, infinite index, …), 2 on usage or parse errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stallings::subgroup::{enumerate_index_subgroups, is_basis, is_free_family, is_generating};
use stallings::{Alphabet, Subgroup, Word};

#[derive(Parser)]
#[command(
    name = "stallings",
    version,
    about = "Stallings automata for subgroups of free groups"
)]
struct Cli {
    /// Alphabet rank n of the ambient free group F_n; when omitted it is
    /// inferred as the maximum letter appearing in the inputs
    #[arg(short = 'n', long = "rank", global = true)]
    rank: Option<usize>,

    /// Seed for randomized features (reserved; no feature uses it yet)
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SubgroupArg {
    /// File with one generator word per line; `#` starts a comment
    #[arg(short = 'H', long = "subgroup", value_name = "FILE")]
    subgroup: PathBuf,
}

#[derive(Args)]
struct PairArgs {
    #[command(flatten)]
    first: SubgroupArg,

    /// Second generator file
    #[arg(short = 'K', long = "other", value_name = "FILE")]
    other: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a word
    Reduce { word: String },
    /// Print the Stallings automaton in the line-oriented text format
    Stallings {
        #[command(flatten)]
        subgroup: SubgroupArg,
        /// Dump the folding trace, one event per line, to stderr
        #[arg(long)]
        trace: bool,
    },
    /// Print a basis of the subgroup, one word per line
    Basis {
        #[command(flatten)]
        subgroup: SubgroupArg,
    },
    /// Print the rank of the subgroup
    Rank {
        #[command(flatten)]
        subgroup: SubgroupArg,
    },
    /// Decide membership; on success print a witness product of the
    /// generators
    Member {
        #[command(flatten)]
        subgroup: SubgroupArg,
        word: String,
    },
    /// Print a membership witness as a product of the generators
    Express {
        #[command(flatten)]
        subgroup: SubgroupArg,
        word: String,
    },
    /// Print the index and a coset transversal, or `infinite`
    Index {
        #[command(flatten)]
        subgroup: SubgroupArg,
    },
    /// Print a coset transversal, one representative per line
    Transversal {
        #[command(flatten)]
        subgroup: SubgroupArg,
    },
    /// Decide normality
    Normal {
        #[command(flatten)]
        subgroup: SubgroupArg,
    },
    /// Decide conjugacy; on success print a conjugator
    Conjugate {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Print a basis of the intersection, one word per line
    Intersect {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Audit the pullback product against the Hanna Neumann bounds
    Shn {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Print a representative of Hu ∩ Kv, or `empty`
    Coset {
        #[command(flatten)]
        pair: PairArgs,
        u: String,
        v: String,
    },
    /// Hall completion: print its index and basis (the subgroup's basis
    /// extended)
    Hall {
        #[command(flatten)]
        subgroup: SubgroupArg,
    },
    /// Enumerate all subgroups of the given index; print the count and
    /// one basis per line
    Enumerate { index: usize },
    /// Decide whether the words in the file form a free family
    FreeFamily {
        #[command(flatten)]
        subgroup: SubgroupArg,
    },
    /// Decide whether the words in the file generate the whole group
    Generates {
        #[command(flatten)]
        subgroup: SubgroupArg,
    },
    /// Render the Stallings automaton as DOT
    Dot {
        #[command(flatten)]
        subgroup: SubgroupArg,
        /// Write to a file instead of stdout
        #[arg(short = 'o', long = "output", value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// Words read from a generator file, comments and blank lines stripped.
fn read_word_file(path: &PathBuf) -> Result<Vec<String>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Ok(text
        .lines()
        .map(|line| line.split('#').next().unwrap_or("").trim().to_string())
        .filter(|line| !line.is_empty())
        .collect())
}

/// The alphabet: the explicit rank, or the maximum letter seen.
fn resolve_alphabet(rank: Option<usize>, texts: &[String]) -> Result<Alphabet, String> {
    if let Some(rank) = rank {
        return Ok(Alphabet::new(rank));
    }
    let unbounded = Alphabet::new(usize::MAX);
    let mut max_index = 0;
    for text in texts {
        let word = Word::parse(unbounded, text).map_err(|e| e.to_string())?;
        for letter in word.letters() {
            max_index = max_index.max(letter.index());
        }
    }
    Ok(Alphabet::new(max_index))
}

fn parse_words(alphabet: Alphabet, texts: &[String]) -> Result<Vec<Word>, String> {
    texts
        .iter()
        .map(|t| Word::parse(alphabet, t).map_err(|e| e.to_string()))
        .collect()
}

struct Loaded {
    alphabet: Alphabet,
    words: Vec<Vec<Word>>,
}

/// Reads every input up front so rank inference sees all letters: one
/// word group per generator file, then one for the loose word arguments.
fn load(rank: Option<usize>, files: &[&PathBuf], extra: &[&String]) -> Result<Loaded, String> {
    let mut groups: Vec<Vec<String>> = Vec::new();
    for path in files {
        groups.push(read_word_file(path)?);
    }
    groups.push(extra.iter().map(|s| s.to_string()).collect());
    let all: Vec<String> = groups.iter().flatten().cloned().collect();
    let alphabet = resolve_alphabet(rank, &all)?;
    let words = groups
        .iter()
        .map(|g| parse_words(alphabet, g))
        .collect::<Result<_, _>>()?;
    Ok(Loaded { alphabet, words })
}

fn make(alphabet: Alphabet, gens: &[Word]) -> Result<Subgroup, String> {
    Subgroup::make(alphabet, gens).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<bool, String> {
    match &cli.command {
        Command::Reduce { word } => {
            let loaded = load(cli.rank, &[], &[word])?;
            println!("{}", loaded.words[0][0]);
            Ok(true)
        }
        Command::Stallings { subgroup, trace } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            if *trace {
                for event in h.trace().events() {
                    eprintln!("{event}");
                }
            }
            print!("{}", h.stallings().to_text());
            Ok(true)
        }
        Command::Basis { subgroup } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            for word in h.basis() {
                println!("{word}");
            }
            Ok(true)
        }
        Command::Rank { subgroup } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            println!("{}", h.rank());
            Ok(true)
        }
        Command::Member { subgroup, word } | Command::Express { subgroup, word } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[word])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            match h.express(&loaded.words[1][0]).map_err(|e| e.to_string())? {
                Some(witness) => {
                    println!("{witness}");
                    Ok(true)
                }
                None => {
                    println!("not a member");
                    Ok(false)
                }
            }
        }
        Command::Index { subgroup } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            match h.finite_index_data() {
                Some(data) => {
                    println!("{}", data.index);
                    for rep in &data.transversal {
                        println!("{rep}");
                    }
                    Ok(true)
                }
                None => {
                    println!("infinite");
                    Ok(false)
                }
            }
        }
        Command::Transversal { subgroup } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            match h.finite_index_data() {
                Some(data) => {
                    for rep in &data.transversal {
                        println!("{rep}");
                    }
                    Ok(true)
                }
                None => {
                    println!("infinite");
                    Ok(false)
                }
            }
        }
        Command::Normal { subgroup } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            if h.is_normal() {
                println!("normal");
                Ok(true)
            } else {
                println!("not normal");
                Ok(false)
            }
        }
        Command::Conjugate { pair } => {
            let loaded = load(cli.rank, &[&pair.first.subgroup, &pair.other], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            let k = make(loaded.alphabet, &loaded.words[1])?;
            match h.are_conjugate(&k).map_err(|e| e.to_string())? {
                Some(witness) => {
                    println!("{witness}");
                    Ok(true)
                }
                None => {
                    println!("not conjugate");
                    Ok(false)
                }
            }
        }
        Command::Intersect { pair } => {
            let loaded = load(cli.rank, &[&pair.first.subgroup, &pair.other], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            let k = make(loaded.alphabet, &loaded.words[1])?;
            let meet = h.intersect(&k).map_err(|e| e.to_string())?;
            for word in meet.basis() {
                println!("{word}");
            }
            Ok(true)
        }
        Command::Shn { pair } => {
            let loaded = load(cli.rank, &[&pair.first.subgroup, &pair.other], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            let k = make(loaded.alphabet, &loaded.words[1])?;
            let audit = h.shn_audit(&k).map_err(|e| e.to_string())?;
            let ranks: Vec<String> = audit
                .component_reduced_ranks
                .iter()
                .map(usize::to_string)
                .collect();
            println!("components: {}", ranks.join(" "));
            println!("sum: {}", audit.sum);
            println!("howson bound: {}", audit.howson_bound);
            println!("strong bound: {}", audit.strong_bound);
            Ok(true)
        }
        Command::Coset { pair, u, v } => {
            let loaded = load(cli.rank, &[&pair.first.subgroup, &pair.other], &[u, v])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            let k = make(loaded.alphabet, &loaded.words[1])?;
            let (u, v) = (&loaded.words[2][0], &loaded.words[2][1]);
            match h.coset_intersect(u, &k, v).map_err(|e| e.to_string())? {
                Some(witness) => {
                    println!("{witness}");
                    Ok(true)
                }
                None => {
                    println!("empty");
                    Ok(false)
                }
            }
        }
        Command::Hall { subgroup } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            let completion = h.hall_completion();
            let index = completion
                .finite_index_data()
                .expect("completion has finite index")
                .index;
            println!("{index}");
            for word in completion.basis() {
                println!("{word}");
            }
            Ok(true)
        }
        Command::Enumerate { index } => {
            let rank = cli
                .rank
                .ok_or("enumerate has no words to infer the rank from; pass -n")?;
            let subgroups = enumerate_index_subgroups(Alphabet::new(rank), *index)
                .map_err(|e| e.to_string())?;
            println!("{}", subgroups.len());
            for h in &subgroups {
                let basis: Vec<String> = h.basis().iter().map(Word::to_string).collect();
                println!("{}", basis.join(" "));
            }
            Ok(true)
        }
        Command::FreeFamily { subgroup } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[])?;
            if is_free_family(loaded.alphabet, &loaded.words[0]).map_err(|e| e.to_string())? {
                println!("free");
                Ok(true)
            } else {
                println!("not free");
                Ok(false)
            }
        }
        Command::Generates { subgroup } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[])?;
            let family = &loaded.words[0];
            if is_generating(loaded.alphabet, family).map_err(|e| e.to_string())? {
                let qualifier = if is_basis(loaded.alphabet, family).map_err(|e| e.to_string())? {
                    " (a basis)"
                } else {
                    ""
                };
                println!("generates{qualifier}");
                Ok(true)
            } else {
                println!("does not generate");
                Ok(false)
            }
        }
        Command::Dot { subgroup, output } => {
            let loaded = load(cli.rank, &[&subgroup.subgroup], &[])?;
            let h = make(loaded.alphabet, &loaded.words[0])?;
            let dot = h.stallings().to_dot();
            match output {
                Some(path) => fs::write(path, dot)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                None => print!("{dot}"),
            }
            Ok(true)
        }
    }
}
