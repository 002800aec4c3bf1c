//! Flat on-disk formats for trained tables and network checkpoints.
//!
//! Q tables are written as a binary/CSV pair with the same content:
//!
//! * text (`.csv`): a header record
//!   `qtable,<points>,<profiles>,<gamma>,<kappa>,<episodes>`, then `points`
//!   comma-separated rows of values (row-major over profiles), then `points`
//!   rows of visit counts;
//! * binary (`.bin`): magic `MFCQTAB1`, little-endian u64 points/profiles,
//!   f64 gamma/kappa, u64 episodes, then the values as f64 and the counts as
//!   u64, row-major.
//!
//! Network checkpoints are a single text file: a header record
//! `mlp,<num_dims>,<d0>,...,<dk>,<output>,<lo>,<hi>` (output `identity` or
//! `tanh_box`), then per layer one row of weights per output unit followed by
//! one row of biases. Floats use the shortest round-trip decimal form, so a
//! save/load cycle is bit-exact.
//!
//! Lines starting with `#` are metadata comments and are skipped on load.

use crate::error::{Error, Result};
use crate::mfq::LearnedQTable;
use crate::neural::{Layer, MlpParams, OutputActivation};
use std::fs;
use std::io::Write;
use std::path::Path;

const QTABLE_MAGIC: &[u8; 8] = b"MFCQTAB1";

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("line {line}: bad float {token:?}")))
}

fn parse_u64(token: &str, line: usize) -> Result<u64> {
    token
        .trim()
        .parse::<u64>()
        .map_err(|_| Error::Format(format!("line {line}: bad integer {token:?}")))
}

/// Render the text form of a table.
pub fn qtable_to_string(table: &LearnedQTable) -> String {
    let points = table.num_points();
    let np = table.num_profiles;
    let mut text = String::new();
    text.push_str(&format!(
        "qtable,{},{},{},{},{}\n",
        points, np, table.gamma, table.kappa, table.episode
    ));
    for p in 0..points {
        let row: Vec<String> = table.row(p).iter().map(|v| format!("{v}")).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    for p in 0..points {
        let row: Vec<String> = table.visit_counts[p * np..(p + 1) * np]
            .iter()
            .map(|c| format!("{c}"))
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

/// Render the binary form of a table.
pub fn qtable_to_bytes(table: &LearnedQTable) -> Vec<u8> {
    let points = table.num_points();
    let np = table.num_profiles;
    let mut bin = Vec::new();
    bin.extend_from_slice(QTABLE_MAGIC);
    bin.extend_from_slice(&(points as u64).to_le_bytes());
    bin.extend_from_slice(&(np as u64).to_le_bytes());
    bin.extend_from_slice(&table.gamma.to_le_bytes());
    bin.extend_from_slice(&table.kappa.to_le_bytes());
    bin.extend_from_slice(&(table.episode as u64).to_le_bytes());
    for v in &table.values {
        bin.extend_from_slice(&v.to_le_bytes());
    }
    for c in &table.visit_counts {
        bin.extend_from_slice(&c.to_le_bytes());
    }
    bin
}

/// Write the table as `<base>.csv` and `<base>.bin`.
pub fn save_qtable(base: &Path, table: &LearnedQTable) -> Result<()> {
    fs::write(base.with_extension("csv"), qtable_to_string(table))?;
    let mut f = fs::File::create(base.with_extension("bin"))?;
    f.write_all(&qtable_to_bytes(table))?;
    Ok(())
}

/// Load from either the `.csv` or the `.bin` form, decided by extension.
pub fn load_qtable(path: &Path) -> Result<LearnedQTable> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => load_qtable_bin(path),
        _ => load_qtable_csv(path),
    }
}

fn load_qtable_csv(path: &Path) -> Result<LearnedQTable> {
    let text = fs::read_to_string(path)?;
    qtable_from_str(&text)
}

/// Parse the text form (metadata comment lines are skipped).
pub fn qtable_from_str(text: &str) -> Result<LearnedQTable> {
    let mut lines = data_lines(text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty table file".into()))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() != 6 || fields[0] != "qtable" {
        return Err(Error::Format(format!("line {ln}: bad table header")));
    }
    let points = parse_u64(fields[1], ln)? as usize;
    let np = parse_u64(fields[2], ln)? as usize;
    let gamma = parse_f64(fields[3], ln)?;
    let kappa = parse_f64(fields[4], ln)?;
    let episodes = parse_u64(fields[5], ln)? as usize;
    let mut values = Vec::with_capacity(points * np);
    let mut counts = Vec::with_capacity(points * np);
    for section in 0..2 {
        for _ in 0..points {
            let (ln, row) = lines
                .next()
                .ok_or_else(|| Error::Format("truncated table file".into()))?;
            let cells: Vec<&str> = row.split(',').collect();
            if cells.len() != np {
                return Err(Error::Format(format!(
                    "line {ln}: expected {np} cells, got {}",
                    cells.len()
                )));
            }
            for c in cells {
                if section == 0 {
                    values.push(parse_f64(c, ln)?);
                } else {
                    counts.push(parse_u64(c, ln)?);
                }
            }
        }
    }
    Ok(LearnedQTable {
        num_profiles: np,
        values,
        visit_counts: counts,
        episode: episodes,
        gamma,
        kappa,
        last_mean_td: 0.0,
    })
}

fn load_qtable_bin(path: &Path) -> Result<LearnedQTable> {
    let bytes = fs::read(path)?;
    let need = |n: usize, at: usize| -> Result<()> {
        if bytes.len() < at + n {
            Err(Error::Format("truncated binary table".into()))
        } else {
            Ok(())
        }
    };
    need(8, 0)?;
    if &bytes[0..8] != QTABLE_MAGIC {
        return Err(Error::Format("bad magic in binary table".into()));
    }
    let mut at = 8usize;
    let read_u64 = |at: &mut usize| -> Result<u64> {
        need(8, *at)?;
        let v = u64::from_le_bytes(bytes[*at..*at + 8].try_into().unwrap());
        *at += 8;
        Ok(v)
    };
    let points = read_u64(&mut at)? as usize;
    let np = read_u64(&mut at)? as usize;
    need(16, at)?;
    let gamma = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let kappa = f64::from_le_bytes(bytes[at + 8..at + 16].try_into().unwrap());
    at += 16;
    let episodes = {
        need(8, at)?;
        let v = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        at += 8;
        v as usize
    };
    let n = points
        .checked_mul(np)
        .ok_or_else(|| Error::Format("table size overflow".into()))?;
    need(16 * n, at)?;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()));
        at += 8;
    }
    let mut counts = Vec::with_capacity(n);
    for _ in 0..n {
        counts.push(u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()));
        at += 8;
    }
    Ok(LearnedQTable {
        num_profiles: np,
        values,
        visit_counts: counts,
        episode: episodes,
        gamma,
        kappa,
        last_mean_td: 0.0,
    })
}

/// Render the text form of a network checkpoint.
pub fn mlp_to_string(params: &MlpParams) -> String {
    let dims = params.dims();
    let (kind, lo, hi) = match params.output {
        OutputActivation::Identity => ("identity", 0.0, 0.0),
        OutputActivation::TanhBox { lo, hi } => ("tanh_box", lo, hi),
    };
    let mut text = String::new();
    let dim_list: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
    text.push_str(&format!(
        "mlp,{},{},{},{},{}\n",
        dims.len(),
        dim_list.join(","),
        kind,
        lo,
        hi
    ));
    for layer in &params.layers {
        for row in &layer.weights {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        let cells: Vec<String> = layer.biases.iter().map(|v| format!("{v}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    text
}

/// Write a network checkpoint.
pub fn save_mlp(path: &Path, params: &MlpParams) -> Result<()> {
    fs::write(path, mlp_to_string(params))?;
    Ok(())
}

pub fn load_mlp(path: &Path) -> Result<MlpParams> {
    let text = fs::read_to_string(path)?;
    mlp_from_str(&text)
}

/// Parse a checkpoint (metadata comment lines are skipped).
pub fn mlp_from_str(text: &str) -> Result<MlpParams> {
    let mut lines = data_lines(text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty checkpoint".into()))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 5 || fields[0] != "mlp" {
        return Err(Error::Format(format!("line {ln}: bad checkpoint header")));
    }
    let num_dims = parse_u64(fields[1], ln)? as usize;
    if fields.len() != 2 + num_dims + 3 {
        return Err(Error::Format(format!(
            "line {ln}: expected {} header fields, got {}",
            2 + num_dims + 3,
            fields.len()
        )));
    }
    let dims: Vec<usize> = fields[2..2 + num_dims]
        .iter()
        .map(|f| parse_u64(f, ln).map(|v| v as usize))
        .collect::<Result<_>>()?;
    let kind = fields[2 + num_dims];
    let lo = parse_f64(fields[3 + num_dims], ln)?;
    let hi = parse_f64(fields[4 + num_dims], ln)?;
    let output = match kind {
        "identity" => OutputActivation::Identity,
        "tanh_box" => OutputActivation::TanhBox { lo, hi },
        other => {
            return Err(Error::Format(format!(
                "line {ln}: unknown output activation {other:?}"
            )))
        }
    };
    let mut layers = Vec::with_capacity(dims.len().saturating_sub(1));
    for k in 0..dims.len().saturating_sub(1) {
        let (fan_in, fan_out) = (dims[k], dims[k + 1]);
        let mut weights = Vec::with_capacity(fan_out);
        for _ in 0..fan_out {
            let (ln, row) = lines
                .next()
                .ok_or_else(|| Error::Format("truncated checkpoint".into()))?;
            let cells: Vec<&str> = row.split(',').collect();
            if cells.len() != fan_in {
                return Err(Error::Format(format!(
                    "line {ln}: expected {fan_in} weights, got {}",
                    cells.len()
                )));
            }
            weights.push(
                cells
                    .iter()
                    .map(|c| parse_f64(c, ln))
                    .collect::<Result<Vec<f64>>>()?,
            );
        }
        let (ln, row) = lines
            .next()
            .ok_or_else(|| Error::Format("truncated checkpoint".into()))?;
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != fan_out {
            return Err(Error::Format(format!(
                "line {ln}: expected {fan_out} biases, got {}",
                cells.len()
            )));
        }
        let biases = cells
            .iter()
            .map(|c| parse_f64(c, ln))
            .collect::<Result<Vec<f64>>>()?;
        layers.push(Layer { weights, biases });
    }
    if layers.is_empty() {
        return Err(Error::Format("checkpoint has no layers".into()));
    }
    Ok(MlpParams { layers, output })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::env;

    fn scratch(name: &str) -> std::path::PathBuf {
        let mut p = env::temp_dir();
        p.push(format!("mfc-io-test-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn qtable_roundtrip_both_formats() {
        let mut table = LearnedQTable::zeros(3, 2, 0.5, 0.7);
        table.values = vec![0.1, -0.25, 1.0 / 3.0, 2.5e-17, 4.0, -5.5];
        table.visit_counts = vec![1, 2, 3, 4, 5, 6];
        table.episode = 42;
        let base = scratch("qtable");
        save_qtable(&base, &table).unwrap();

        for ext in ["csv", "bin"] {
            let loaded = load_qtable(&base.with_extension(ext)).unwrap();
            assert_eq!(loaded.values, table.values, "{ext}");
            assert_eq!(loaded.visit_counts, table.visit_counts);
            assert_eq!(loaded.episode, 42);
            assert_eq!(loaded.gamma, 0.5);
            assert_eq!(loaded.kappa, 0.7);
        }
        let _ = fs::remove_file(base.with_extension("csv"));
        let _ = fs::remove_file(base.with_extension("bin"));
    }

    #[test]
    fn qtable_csv_ignores_comment_lines() {
        let base = scratch("qtable-comments");
        let mut table = LearnedQTable::zeros(1, 2, 0.9, 0.6);
        table.values = vec![1.5, -2.5];
        table.visit_counts = vec![7, 8];
        save_qtable(&base, &table).unwrap();
        let path = base.with_extension("csv");
        let original = fs::read_to_string(&path).unwrap();
        fs::write(&path, format!("# config_hash=abc\n# seed=1\n{original}")).unwrap();
        let loaded = load_qtable(&path).unwrap();
        assert_eq!(loaded.values, table.values);
        let _ = fs::remove_file(&path);
        let _ = fs::remove_file(base.with_extension("bin"));
    }

    #[test]
    fn mlp_roundtrip_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = MlpParams::feedforward(
            3,
            8,
            2,
            OutputActivation::TanhBox { lo: -7.0, hi: 7.0 },
            &mut rng,
        )
        .unwrap();
        let path = scratch("mlp.csv");
        save_mlp(&path, &p).unwrap();
        let loaded = load_mlp(&path).unwrap();
        assert_eq!(loaded, p);
        let _ = fs::remove_file(&path);
    }

    #[test]
    fn corrupt_files_are_rejected_with_diagnostics() {
        let path = scratch("bad.csv");
        fs::write(&path, "qtable,2,2,0.5,0.7,1\n1.0,2.0\nnot,a\n").unwrap();
        match load_qtable(&path) {
            Err(Error::Format(msg)) => assert!(msg.contains("line"), "{msg}"),
            other => panic!("expected format error, got {other:?}"),
        }
        let _ = fs::remove_file(&path);
    }
}
