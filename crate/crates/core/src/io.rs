//! Family files: JSON Lines, UTF-8, LF line endings.
//!
//! ```text
//! {"x":100,"count":2}
//! {"q":5,"a":0}
//! {"q":10,"a":2}
//! ```
//!
//! The header carries the bound `x` and the item count. Residues outside
//! `[0, q)` are accepted and reduced, with a warning.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::family::{Family, Progression, RawProgression};
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    x: u64,
    count: usize,
}

#[derive(Serialize)]
struct Line {
    q: u64,
    a: u64,
}

pub fn write_family<W: Write>(f: &Family, mut w: W) -> std::io::Result<()> {
    let header = Header { x: f.x_bound(), count: f.len() };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for p in f.items() {
        serde_json::to_writer(&mut w, &Line { q: p.modulus(), a: p.residue() })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Canonical serialization; the bytes hashed by [`Family::digest`].
pub fn family_to_string(f: &Family) -> String {
    let mut buf = Vec::with_capacity(16 * (f.len() + 1));
    write_family(f, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Parse a family file. Malformed lines yield [`Error::Format`]; duplicate or
/// out-of-range moduli and count mismatches yield [`Error::Structure`].
pub fn read_family<R: BufRead>(r: R) -> Result<Family> {
    let mut lines = r.lines().enumerate();
    let header: Header = loop {
        match lines.next() {
            None => return Err(Error::Format { line: 1, message: "missing header".into() }),
            Some((i, line)) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str(&line).map_err(|e| Error::Format {
                    line: i + 1,
                    message: format!("bad header: {e}"),
                })?;
            }
        }
    };

    let mut items = Vec::with_capacity(header.count.min(1 << 20));
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawProgression = serde_json::from_str(&line).map_err(|e| Error::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        let p = Progression::from_signed(raw.a, raw.q)?;
        if raw.a < 0 || raw.a as u64 != p.residue() {
            log::warn!(
                "line {}: residue {} reduced to {} mod {}",
                i + 1,
                raw.a,
                p.residue(),
                p.modulus()
            );
        }
        items.push(p);
    }
    if items.len() != header.count {
        return Err(Error::Structure(format!(
            "header declares {} progressions, file has {}",
            header.count,
            items.len()
        )));
    }
    Family::new(header.x, items)
}

pub fn read_family_file(path: impl AsRef<std::path::Path>) -> Result<Family> {
    let file = std::fs::File::open(path)?;
    read_family(std::io::BufReader::new(file))
}

pub fn write_family_file(f: &Family, path: impl AsRef<std::path::Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_family(f, &mut w)?;
    w.flush()?;
    Ok(())
}
