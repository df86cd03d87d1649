//! Loading lattices, symbol tables, scorers and token files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use latdec::posterior::PosteriorLattice;
use latdec::scorer::{NgramModel, Scorer, TableScorer, UniformScorer};
use latdec::{parse_wfsa, prepare, SymbolTable, Wfsa};

use crate::ScorerKind;

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_symbols(path: &Path) -> Result<SymbolTable> {
    SymbolTable::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// `*.lat` files of `dir` sorted by name, with their ids (file stems).
pub fn lattice_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "lat") {
            let id = path.file_stem().unwrap().to_string_lossy().into_owned();
            out.push((id, path));
        }
    }
    out.sort();
    if out.is_empty() {
        bail!("no .lat files in {}", dir.display());
    }
    Ok(out)
}

/// Parses every lattice of `dir`; failures are returned per file.
pub fn load_raw(dir: &Path, symtab: &mut SymbolTable) -> Result<Vec<(String, Result<Wfsa>)>> {
    Ok(lattice_files(dir)?
        .into_iter()
        .map(|(id, path)| {
            let w = read(&path).and_then(|text| {
                parse_wfsa(&text, symtab).with_context(|| format!("parsing {}", path.display()))
            });
            (id, w)
        })
        .collect())
}

/// Posterior lattice from a file that is either already pushed or raw.
pub fn to_posterior(w: Wfsa) -> Result<PosteriorLattice> {
    if let Ok(p) = PosteriorLattice::from_pushed(w.clone()) {
        return Ok(p);
    }
    Ok(prepare(&w)?)
}

pub fn load_scorer(
    kind: ScorerKind,
    model: Option<&Path>,
    symtab: &mut SymbolTable,
) -> Result<Box<dyn Scorer>> {
    let model_text = |m: Option<&Path>| -> Result<String> {
        match m {
            Some(p) => read(p),
            None => bail!("--scorer {kind:?} needs --model"),
        }
    };
    Ok(match kind {
        ScorerKind::Uniform => Box::new(UniformScorer::new(symtab.labels())),
        ScorerKind::Ngram => Box::new(
            NgramModel::parse(&model_text(model)?, symtab).context("loading n-gram model")?,
        ),
        ScorerKind::Table => Box::new(
            TableScorer::parse(&model_text(model)?, symtab).context("loading table scorer")?,
        ),
    })
}

/// One whitespace-tokenized sentence per line.
pub fn read_sentences(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(read(path)?
        .lines()
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect())
}

pub fn encode_all(sentences: &[Vec<String>], symtab: &mut SymbolTable) -> Vec<Vec<u32>> {
    sentences
        .iter()
        .map(|s| s.iter().map(|t| symtab.intern(t)).collect())
        .collect()
}
