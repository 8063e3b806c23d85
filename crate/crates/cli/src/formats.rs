//! File formats: linkage, partition, edge-list, dense-matrix, time-series,
//! coordinate, region, consensus-tree and membership files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use hce_core::{
    validate_linkage, Linkage, Partition, RawMerge, TimeSeriesMatrix, TreeEdge, WeightedGraph,
};

use crate::error::{CliError, CoreContext, Result};

pub const DENSE_MAGIC: &[u8; 4] = b"HCEM";
pub const SERIES_MAGIC: &[u8; 4] = b"HCET";
/// dtype tag of little-endian f64 payloads in dense-matrix files.
pub const DTYPE_F64: u32 = 1;

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    Ok(bytes)
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn csv_reader(path: &Path, has_headers: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::parse(path, line, format!("{other:?}")),
    }
}

/// Records of a headed CSV whose header must equal `expected`.
fn headed_records(path: &Path, expected: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut reader = csv_reader(path, true)?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let names: Vec<String> = header.iter().map(str::to_ascii_lowercase).collect();
    if names != expected {
        return Err(CliError::parse(
            path,
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), names.join(",")),
        ));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        out.push((line, record));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, record: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    let raw = record.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| CliError::parse(path, line, format!("invalid {name} `{raw}`")))
}

fn finite(path: &Path, line: usize, value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::parse(path, line, format!("{what} must be finite")))
    }
}

pub fn read_linkage(path: &Path) -> Result<Linkage> {
    let records = headed_records(path, &["left", "right", "distance", "size"])?;
    let mut rows = Vec::with_capacity(records.len());
    for (line, r) in &records {
        rows.push(RawMerge {
            left: field(path, *line, r, 0, "left id")?,
            right: field(path, *line, r, 1, "right id")?,
            distance: field(path, *line, r, 2, "distance")?,
            size: Some(field(path, *line, r, 3, "size")?),
        });
    }
    validate_linkage(&rows, rows.len() + 1).map_err(|e| match e {
        hce_core::LinkageError::WrongRowCount { .. } | hce_core::LinkageError::NoLeaves => {
            CliError::parse(path, 1, e.to_string())
        }
        other => {
            let row = match &other {
                hce_core::LinkageError::IdOutOfRange { row, .. }
                | hce_core::LinkageError::ChildReused { row, .. }
                | hce_core::LinkageError::NonMonotoneDistances { row, .. }
                | hce_core::LinkageError::InvalidDistance { row, .. }
                | hce_core::LinkageError::SizeMismatch { row, .. } => *row,
                _ => 0,
            };
            CliError::parse(path, records.get(row).map_or(1, |r| r.0), other.to_string())
        }
    })
}

pub fn write_linkage(path: &Path, linkage: &Linkage) -> Result<()> {
    let mut w = create(path)?;
    let mut text = String::from("left,right,distance,size\n");
    for m in linkage.merges() {
        text.push_str(&format!("{},{},{},{}\n", m.left, m.right, m.distance, m.size));
    }
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Partition CSV; nodes must be exactly `0..n` in any order. Labels are
/// arbitrary strings.
pub fn read_partition(path: &Path) -> Result<Partition> {
    let records = headed_records(path, &["node", "label"])?;
    let n = records.len();
    let mut labels: Vec<Option<String>> = vec![None; n];
    for (line, r) in &records {
        let node: usize = field(path, *line, r, 0, "node id")?;
        if node >= n {
            return Err(CliError::parse(path, *line, format!("node {node} out of range for {n} rows")));
        }
        if labels[node].is_some() {
            return Err(CliError::parse(path, *line, format!("node {node} listed twice")));
        }
        labels[node] = Some(r.get(1).unwrap_or("").to_string());
    }
    let labels: Vec<String> = labels.into_iter().map(|l| l.expect("every node seen")).collect();
    Ok(Partition::from_labels(&labels))
}

/// Writes `node,label` rows; `nodes[i]` is the external id of row `i`.
pub fn write_partition(path: &Path, nodes: &[usize], partition: &Partition) -> Result<()> {
    let mut text = String::from("node,label\n");
    for (i, &node) in nodes.iter().enumerate() {
        text.push_str(&format!("{node},{}\n", partition.label(i)));
    }
    write_text(path, &text)
}

/// Tab-separated `src dst weight` lines; `#` comments and a non-numeric
/// header line are skipped. Node count is the largest id + 1 unless given.
pub fn read_edge_list(path: &Path, nodes: Option<usize>) -> Result<WeightedGraph> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| CliError::parse(path, 0, "not UTF-8 text"))?;
    let mut edges = Vec::new();
    let mut max_id = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        if edges.is_empty() && max_id.is_none() && parts[0].parse::<usize>().is_err() {
            continue;
        }
        if parts.len() != 3 {
            return Err(CliError::parse(path, line, format!("expected 3 tab-separated fields, found {}", parts.len())));
        }
        let bad = |what: &str, v: &str| CliError::parse(path, line, format!("invalid {what} `{v}`"));
        let u: usize = parts[0].parse().map_err(|_| bad("source id", parts[0]))?;
        let v: usize = parts[1].parse().map_err(|_| bad("target id", parts[1]))?;
        let w: f64 = parts[2].parse().map_err(|_| bad("weight", parts[2]))?;
        if !(w.is_finite() && w >= 0.0) {
            return Err(bad("weight", parts[2]));
        }
        max_id = Some(max_id.unwrap_or(0).max(u).max(v));
        edges.push((u, v, w));
    }
    let n = match (nodes, max_id) {
        (Some(n), Some(m)) if m >= n => {
            return Err(CliError::Validation(format!("{}: node id {m} exceeds --nodes {n}", path.display())))
        }
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => return Err(CliError::parse(path, 0, "no edges")),
    };
    WeightedGraph::from_edges(n, edges).context(path.display().to_string())
}

pub fn write_edge_list(path: &Path, edges: &[(usize, usize)]) -> Result<()> {
    let mut text = String::with_capacity(edges.len() * 12);
    for &(u, v) in edges {
        text.push_str(&format!("{u}\t{v}\t1\n"));
    }
    write_text(path, &text)
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes"))
}

fn f64_payload(path: &Path, bytes: &[u8], count: usize) -> Result<Vec<f64>> {
    if bytes.len() != count * 8 {
        return Err(CliError::parse(
            path,
            0,
            format!("payload has {} bytes, expected {}", bytes.len(), count * 8),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

/// Headerless numeric CSV rows.
fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv_reader(path, false)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut row = Vec::with_capacity(record.len());
        for raw in record.iter() {
            let v: f64 = raw
                .parse()
                .map_err(|_| CliError::parse(path, line, format!("invalid number `{raw}`")))?;
            row.push(finite(path, line, v, "value")?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Dense square matrix: CSV, or `HCEM` + u32 n + u32 dtype + u32 reserved
/// followed by n² little-endian f64 values, row-major.
pub fn read_dense(path: &Path) -> Result<Vec<Vec<f64>>> {
    let bytes = read_bytes(path)?;
    let rows = if bytes.starts_with(DENSE_MAGIC) {
        if bytes.len() < 16 {
            return Err(CliError::parse(path, 0, "truncated HCEM header"));
        }
        let n = u32_at(&bytes, 4) as usize;
        let dtype = u32_at(&bytes, 8);
        if dtype != DTYPE_F64 {
            return Err(CliError::parse(path, 0, format!("unsupported dtype tag {dtype}")));
        }
        let values = f64_payload(path, &bytes[16..], n * n)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CliError::parse(path, 0, format!("non-finite value at entry {i}")));
        }
        values.chunks_exact(n.max(1)).map(<[f64]>::to_vec).collect()
    } else {
        read_numeric_csv(path)?
    };
    let n = rows.len();
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err(CliError::parse(path, i + 1, format!("matrix is not square: row has {} values, expected {n}", rows[i].len())));
    }
    Ok(rows)
}

pub fn is_binary_series(path: &Path) -> Result<bool> {
    let mut magic = [0u8; 4];
    let mut file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let read = file.read(&mut magic).map_err(|e| CliError::io(path, e))?;
    Ok(read == 4 && &magic == SERIES_MAGIC)
}

/// Time series: CSV with one row per trace, or `HCET` + u32 rows + u32 cols
/// followed by little-endian f64 values, row-major.
pub fn read_series(path: &Path) -> Result<TimeSeriesMatrix> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(SERIES_MAGIC) {
        if bytes.len() < 12 {
            return Err(CliError::parse(path, 0, "truncated HCET header"));
        }
        let rows = u32_at(&bytes, 4) as usize;
        let cols = u32_at(&bytes, 8) as usize;
        let values = f64_payload(path, &bytes[12..], rows * cols)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CliError::parse(path, 0, format!("non-finite value at entry {i}")));
        }
        return TimeSeriesMatrix::from_flat(rows, cols, values).context(path.display().to_string());
    }
    let rows = read_numeric_csv(path)?;
    TimeSeriesMatrix::from_rows(rows).context(path.display().to_string())
}

pub fn write_series(path: &Path, m: &TimeSeriesMatrix, binary: bool) -> Result<()> {
    let mut w = create(path)?;
    let result = if binary {
        let mut bytes = Vec::with_capacity(12 + m.data().len() * 8);
        bytes.extend_from_slice(SERIES_MAGIC);
        bytes.extend_from_slice(&(m.rows() as u32).to_le_bytes());
        bytes.extend_from_slice(&(m.cols() as u32).to_le_bytes());
        for v in m.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&bytes)
    } else {
        let mut text = String::new();
        for row in m.iter_rows() {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        w.write_all(text.as_bytes())
    };
    result.and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Coordinates CSV `roi,x,y,z` (any number of coordinate columns after
/// `roi`); ids must be exactly `0..n`. Returned in id order.
pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv_reader(path, true)?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("roi") {
        return Err(CliError::parse(path, 1, "expected header `roi,x,y,z`"));
    }
    let mut rows: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let roi: usize = field(path, line, &record, 0, "roi id")?;
        let mut coords = Vec::with_capacity(record.len() - 1);
        for i in 1..record.len() {
            let v: f64 = field(path, line, &record, i, "coordinate")?;
            coords.push(finite(path, line, v, "coordinate")?);
        }
        rows.push((roi, line, coords));
    }
    rows.sort_by_key(|r| r.0);
    for (i, (roi, line, _)) in rows.iter().enumerate() {
        if *roi != i {
            return Err(CliError::parse(path, *line, format!("roi ids must be 0..{} without gaps or repeats", rows.len())));
        }
    }
    Ok(rows.into_iter().map(|r| r.2).collect())
}

/// Region labels `roi,region`, grouped in order of first appearance.
pub fn read_regions(path: &Path) -> Result<Vec<(String, Vec<usize>)>> {
    let records = headed_records(path, &["roi", "region"])?;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut regions: Vec<(String, Vec<usize>)> = Vec::new();
    for (line, r) in &records {
        let roi: usize = field(path, *line, r, 0, "roi id")?;
        let name = r.get(1).unwrap_or("").to_string();
        let slot = *index.entry(name.clone()).or_insert_with(|| {
            regions.push((name, Vec::new()));
            regions.len() - 1
        });
        regions[slot].1.push(roi);
    }
    Ok(regions)
}

pub fn read_tree(path: &Path) -> Result<Vec<TreeEdge<u64>>> {
    headed_records(path, &["parent", "child", "similarity"])?
        .iter()
        .map(|(line, r)| {
            Ok(TreeEdge {
                parent: field(path, *line, r, 0, "parent id")?,
                child: field(path, *line, r, 1, "child id")?,
                similarity: field(path, *line, r, 2, "similarity")?,
            })
        })
        .collect()
}

/// Finest consensus membership `node,community`; nodes must be `0..n`.
pub fn read_communities(path: &Path) -> Result<Vec<u64>> {
    let records = headed_records(path, &["node", "community"])?;
    let n = records.len();
    let mut s_c: Vec<Option<u64>> = vec![None; n];
    for (line, r) in &records {
        let node: usize = field(path, *line, r, 0, "node id")?;
        if node >= n || s_c[node].is_some() {
            return Err(CliError::parse(path, *line, format!("node ids must be 0..{n} without repeats")));
        }
        s_c[node] = Some(field(path, *line, r, 1, "community id")?);
    }
    Ok(s_c.into_iter().map(|c| c.expect("every node seen")).collect())
}
