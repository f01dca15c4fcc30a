//! File access: atomic output, compiled model directories.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use morphdec_core::{Model, ModelSources};

use crate::CliError;

pub const FORMAT_LINE: &str = "morphdec-index 1";

const INVENTORY: &str = "inventory.tsv";
const TAGS: &str = "tags.tsv";
const MORPH: &str = "morph.tsv";
const PHON: &str = "phon.tsv";
const LEXICON: &str = "lexicon.tsv";
const FORMAT: &str = "FORMAT";

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parent_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so `path` is either untouched or complete.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = parent_of(path);
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err(&dir))?;
    tmp.write_all(contents.as_bytes()).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Data(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// `path` when given, stdout otherwise.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes()).map_err(|e| CliError::Data(format!("stdout: {e}")))
        }
    }
}

/// Fills a fresh sibling directory with `files` and swaps it in for `dir`.
pub fn write_dir_atomic(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    let parent = parent_of(dir);
    fs::create_dir_all(&parent).map_err(io_err(&parent))?;
    let staging = tempfile::Builder::new().prefix(".morphdec-").tempdir_in(&parent).map_err(io_err(&parent))?;
    for (name, body) in files {
        let p = staging.path().join(name);
        fs::write(&p, body).map_err(io_err(&p))?;
    }
    let staged = staging.keep();
    let old = if dir.exists() {
        let old = parent.join(format!(".morphdec-old-{}", std::process::id()));
        fs::rename(dir, &old).map_err(io_err(dir))?;
        Some(old)
    } else {
        None
    };
    if let Err(e) = fs::rename(&staged, dir) {
        if let Some(old) = &old {
            let _ = fs::rename(old, dir);
        }
        let _ = fs::remove_dir_all(&staged);
        return Err(io_err(dir)(e));
    }
    if let Some(old) = old {
        let _ = fs::remove_dir_all(old);
    }
    Ok(())
}

/// The files `compile` writes for a validated model.
pub fn model_dir_files(src: &ModelSources, model: &Model) -> Vec<(&'static str, String)> {
    let mut diag = model.diagnostics().join("\n");
    diag.push('\n');
    vec![
        (FORMAT, format!("{FORMAT_LINE}\n")),
        (INVENTORY, src.inventory.clone()),
        (TAGS, src.tags.clone()),
        (MORPH, src.morph.clone()),
        (PHON, src.phon.clone()),
        (LEXICON, src.lexicon.clone()),
        ("trie.dot", model.index.to_dot(&model.lexicon, &model.phonology.inventory)),
        ("diagnostics.txt", diag),
    ]
}

/// Loads a compiled model directory; `matrices` replaces its morpheme and
/// phoneme matrices. Without `index` the bundled model is used.
pub fn load_model(index: Option<&Path>, matrices: Option<&Path>) -> Result<Model, CliError> {
    let mut src = match index {
        None => ModelSources::bundled(),
        Some(dir) => {
            let format = read(&dir.join(FORMAT))?;
            if format.trim() != FORMAT_LINE {
                return Err(CliError::Data(format!("{}: not a compiled index ({:?})", dir.display(), format.trim())));
            }
            ModelSources {
                inventory: read(&dir.join(INVENTORY))?,
                tags: read(&dir.join(TAGS))?,
                morph: read(&dir.join(MORPH))?,
                phon: read(&dir.join(PHON))?,
                lexicon: read(&dir.join(LEXICON))?,
            }
        }
    };
    if let Some(dir) = matrices {
        src.morph = read(&dir.join(MORPH))?;
        src.phon = read(&dir.join(PHON))?;
    }
    Ok(Model::from_sources(&src)?)
}
