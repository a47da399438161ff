//! Run artifacts: an output directory holding the resolved config echo, the
//! experiment CSVs, optional SVG plots, and a `bundle.txt` manifest.
//!
//! The bundle hash is a git-style content hash of the run's inputs: sha256
//! over `"phaselab-config <len>\0"` plus the echo bytes. Two runs with the
//! same resolved configuration therefore share a hash no matter where their
//! outputs land.

use std::fs;
use std::path::{Path, PathBuf};

use phaselab::Result;
use sha2::{Digest, Sha256};

pub fn config_hash(echo: &str) -> String {
    let mut h = Sha256::new();
    h.update(format!("phaselab-config {}\0", echo.len()).as_bytes());
    h.update(echo.as_bytes());
    let digest = h.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

#[derive(Debug)]
pub struct ResultBundle {
    pub out_dir: PathBuf,
    pub csv_paths: Vec<PathBuf>,
    pub plot_paths: Vec<PathBuf>,
    /// Non-CSV data files (e.g. PGM corpora), still listed in the manifest.
    pub aux_paths: Vec<PathBuf>,
    pub echo_path: PathBuf,
    pub hash: String,
}

impl ResultBundle {
    /// Create the output directory and write the config echo.
    pub fn create(out_dir: &Path, echo: &str) -> Result<Self> {
        fs::create_dir_all(out_dir)?;
        let echo_path = out_dir.join("echo.txt");
        fs::write(&echo_path, echo)?;
        Ok(ResultBundle {
            out_dir: out_dir.to_path_buf(),
            csv_paths: Vec::new(),
            plot_paths: Vec::new(),
            aux_paths: Vec::new(),
            echo_path,
            hash: config_hash(echo),
        })
    }

    /// Register every file under `dir` (recursively, sorted) as emitted.
    pub fn register_tree(&mut self, dir: &Path) -> Result<()> {
        let mut stack = vec![dir.to_path_buf()];
        let mut files = Vec::new();
        while let Some(d) = stack.pop() {
            for entry in fs::read_dir(&d)? {
                let path = entry?.path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    files.push(path);
                }
            }
        }
        files.sort();
        self.aux_paths.extend(files);
        Ok(())
    }

    pub fn add_csv(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes)?;
        self.csv_paths.push(path.clone());
        Ok(path)
    }

    /// Register a CSV some core writer already placed in the bundle dir.
    pub fn register_csv(&mut self, name: &str) -> PathBuf {
        let path = self.out_dir.join(name);
        self.csv_paths.push(path.clone());
        path
    }

    pub fn add_plot(&mut self, name: &str, svg: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, svg)?;
        self.plot_paths.push(path.clone());
        Ok(path)
    }

    /// Write `bundle.txt`: the input hash plus one line per emitted file
    /// (itself included), relative to the bundle directory.
    pub fn finalize(&self) -> Result<PathBuf> {
        let mut text = format!("hash {}\n", self.hash);
        let rel = |p: &Path| {
            p.strip_prefix(&self.out_dir).unwrap_or(p).display().to_string()
        };
        text.push_str(&format!("file {}\n", rel(&self.echo_path)));
        for p in self.csv_paths.iter().chain(&self.plot_paths).chain(&self.aux_paths) {
            text.push_str(&format!("file {}\n", rel(p)));
        }
        text.push_str("file bundle.txt\n");
        let path = self.out_dir.join("bundle.txt");
        fs::write(&path, text)?;
        Ok(path)
    }
}
