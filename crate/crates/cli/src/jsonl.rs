use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

const CHUNK: usize = 1024;

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn create(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub ok: usize,
    pub failed: usize,
}

/// Streams `input` in chunks, maps records in parallel and writes results in
/// input order. Bad records are reported on stderr and skipped.
pub fn map_records<I, O, F>(input: &Path, out: &mut dyn Write, f: F, mut sink: impl FnMut(&O)) -> Result<Tally>
where
    I: DeserializeOwned + Send,
    O: Serialize + Send,
    F: Fn(I) -> Result<O> + Sync,
{
    let reader = open(input)?;
    let mut tally = Tally::default();
    let mut lines = reader.lines().enumerate();
    loop {
        let mut chunk = Vec::with_capacity(CHUNK);
        for (i, line) in lines.by_ref() {
            let line = line.with_context(|| format!("reading {}", input.display()))?;
            if line.trim().is_empty() {
                continue;
            }
            chunk.push((i + 1, line));
            if chunk.len() == CHUNK {
                break;
            }
        }
        if chunk.is_empty() {
            break;
        }
        let results: Vec<(usize, Result<O>)> = chunk
            .into_par_iter()
            .map(|(lineno, line)| {
                let r = serde_json::from_str::<I>(&line).map_err(anyhow::Error::from).and_then(&f);
                (lineno, r)
            })
            .collect();
        for (lineno, r) in results {
            match r {
                Ok(o) => {
                    serde_json::to_writer(&mut *out, &o)?;
                    out.write_all(b"\n")?;
                    sink(&o);
                    tally.ok += 1;
                }
                Err(e) => {
                    eprintln!("{}:{lineno}: skipped: {e:#}", input.display());
                    tally.failed += 1;
                }
            }
        }
    }
    out.flush()?;
    Ok(tally)
}
