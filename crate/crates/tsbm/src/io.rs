//! Tensor CSV formats and label JSON files.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tsbm_core::{aggregate_stream, build_tensor, Contact, Edge, InteractionTensor, Partition};

use crate::error::{Error, Result};

pub const AGGREGATED_HEADER: [&str; 4] = ["src", "dst", "interval", "count"];
pub const STREAM_HEADER: [&str; 3] = ["t", "src", "dst"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// `src,dst,interval,count` rows.
    Aggregated,
    /// `t,src,dst` contact records binned into intervals of width `delta`.
    Stream,
}

/// How to turn an input file into a tensor. Dimensions left as `None` are
/// inferred from the largest id seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputSpec {
    pub format: InputFormat,
    pub n_nodes: Option<usize>,
    pub n_intervals: Option<usize>,
    pub delta: Option<f64>,
    pub horizon: Option<f64>,
}

impl InputSpec {
    pub fn aggregated() -> Self {
        InputSpec {
            format: InputFormat::Aggregated,
            n_nodes: None,
            n_intervals: None,
            delta: None,
            horizon: None,
        }
    }
}

/// `sha256:<hex>` of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reads and parses `path`, returning the tensor and the digest of the raw
/// file contents.
pub fn load_tensor(path: &Path, spec: &InputSpec) -> Result<(InteractionTensor, String)> {
    let bytes = read_bytes(path)?;
    let tensor = parse_tensor(bytes.as_slice(), spec)?;
    Ok((tensor, digest(&bytes)))
}

pub fn parse_tensor<R: Read>(reader: R, spec: &InputSpec) -> Result<InteractionTensor> {
    match spec.format {
        InputFormat::Aggregated => read_aggregated(reader, spec.n_nodes, spec.n_intervals),
        InputFormat::Stream => {
            let delta = spec
                .delta
                .ok_or_else(|| Error::Usage("stream input needs --delta".into()))?;
            let horizon = spec
                .horizon
                .ok_or_else(|| Error::Usage("stream input needs --horizon".into()))?;
            read_stream(reader, delta, horizon, spec.n_nodes)
        }
    }
}

fn records<R: Read>(
    reader: R,
    header: &[&str],
) -> Result<impl Iterator<Item = Result<(u64, StringRecord)>>> {
    let mut rdr = ReaderBuilder::new()
        .trim(Trim::All)
        .has_headers(true)
        .from_reader(reader);
    let got = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            1,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                got.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(rdr.into_records().map(|rec| {
        rec.map(|r| (r.position().map_or(0, |p| p.line()), r))
            .map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::parse(line, e.to_string())
            })
    }))
}

fn field<T: FromStr>(
    rec: &StringRecord,
    idx: usize,
    name: &str,
    line: u64,
    what: &str,
) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::parse(line, format!("{name}: expected {what}, found `{raw}`")))
}

fn check_id(id: usize, limit: Option<usize>, name: &str, line: u64) -> Result<()> {
    match limit {
        Some(n) if id >= n => Err(Error::parse(
            line,
            format!("{name} {id} is out of range (< {n})"),
        )),
        _ => Ok(()),
    }
}

fn infer(given: Option<usize>, max_id: Option<usize>, what: &str) -> Result<usize> {
    given.or(max_id.map(|m| m + 1)).ok_or_else(|| {
        Error::Usage(format!(
            "cannot infer {what} from an empty input; pass it explicitly"
        ))
    })
}

/// Parses the aggregated format. Duplicate cells are summed.
pub fn read_aggregated<R: Read>(
    reader: R,
    n_nodes: Option<usize>,
    n_intervals: Option<usize>,
) -> Result<InteractionTensor> {
    let mut edges = Vec::new();
    let (mut max_node, mut max_interval) = (None::<usize>, None::<usize>);
    for rec in records(reader, &AGGREGATED_HEADER)? {
        let (line, rec) = rec?;
        let node = "a non-negative integer";
        let src: usize = field(&rec, 0, "src", line, node)?;
        let dst: usize = field(&rec, 1, "dst", line, node)?;
        let interval: usize = field(&rec, 2, "interval", line, node)?;
        let count: u64 = field(&rec, 3, "count", line, node)?;
        if src == dst {
            return Err(Error::parse(line, format!("self-loop on node {src}")));
        }
        check_id(src, n_nodes, "src", line)?;
        check_id(dst, n_nodes, "dst", line)?;
        check_id(interval, n_intervals, "interval", line)?;
        max_node = max_node.max(Some(src.max(dst)));
        max_interval = max_interval.max(Some(interval));
        edges.push(Edge::new(src, dst, interval, count));
    }
    let n = infer(n_nodes, max_node, "the number of nodes")?;
    let u = infer(n_intervals, max_interval, "the number of intervals")?;
    Ok(build_tensor(edges, n, u)?)
}

/// Parses contact records and bins them into `horizon / delta` intervals.
pub fn read_stream<R: Read>(
    reader: R,
    delta: f64,
    horizon: f64,
    n_nodes: Option<usize>,
) -> Result<InteractionTensor> {
    let mut contacts = Vec::new();
    let mut max_node = None::<usize>;
    for rec in records(reader, &STREAM_HEADER)? {
        let (line, rec) = rec?;
        let t: f64 = field(&rec, 0, "t", line, "a number")?;
        let node = "a non-negative integer";
        let src: usize = field(&rec, 1, "src", line, node)?;
        let dst: usize = field(&rec, 2, "dst", line, node)?;
        if !(t > 0.0 && t <= horizon) {
            return Err(Error::parse(
                line,
                format!("t = {t} is outside (0, {horizon}]"),
            ));
        }
        if src == dst {
            return Err(Error::parse(line, format!("self-loop on node {src}")));
        }
        check_id(src, n_nodes, "src", line)?;
        check_id(dst, n_nodes, "dst", line)?;
        max_node = max_node.max(Some(src.max(dst)));
        contacts.push(Contact { t, src, dst });
    }
    let n = infer(n_nodes, max_node, "the number of nodes")?;
    Ok(aggregate_stream(&contacts, delta, horizon, n)?)
}

/// Writes the aggregated format, one row per nonzero cell in sorted order.
pub fn write_aggregated<W: Write>(writer: W, tensor: &InteractionTensor) -> Result<()> {
    let mut w = WriterBuilder::new().from_writer(writer);
    let csv_err = |e: csv::Error| Error::Usage(e.to_string());
    w.write_record(AGGREGATED_HEADER).map_err(csv_err)?;
    for e in tensor.entries() {
        w.serialize((e.src, e.dst, e.interval, e.count))
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Node and interval labels with their cluster counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub node_labels: Vec<usize>,
    pub interval_labels: Vec<usize>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "D")]
    pub d: usize,
}

impl From<&Partition> for PartitionFile {
    fn from(p: &Partition) -> Self {
        PartitionFile {
            node_labels: p.node_labels().to_vec(),
            interval_labels: p.interval_labels().to_vec(),
            k: p.k(),
            d: p.d(),
        }
    }
}

/// Labels of any labelled JSON file (partition or ground truth); other
/// fields are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Labels {
    pub node_labels: Vec<usize>,
    pub interval_labels: Vec<usize>,
}

/// Planted labels and the parameters they were drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub node_labels: Vec<usize>,
    pub interval_labels: Vec<usize>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub scenario: String,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
    pub node_weights: Vec<f64>,
    pub time_weights: Vec<f64>,
    /// Flattened `K x K x D` array, index `(k * K + g) * D + d`.
    pub rates: Vec<f64>,
}

pub fn read_labels(path: &Path) -> Result<Labels> {
    Ok(serde_json::from_slice(&read_bytes(path)?)?)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `interval,cluster` rows for plotting the time clustering.
pub fn write_time_clusters(path: &Path, partition: &Partition) -> Result<()> {
    let mut text = String::from("interval,cluster\n");
    for (u, c) in partition.interval_labels().iter().enumerate() {
        text.push_str(&format!("{u},{c}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_tensor_file(path: &Path, tensor: &InteractionTensor) -> Result<()> {
    let mut buf = Vec::new();
    write_aggregated(&mut buf, tensor)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<InteractionTensor> {
        read_aggregated(text.as_bytes(), None, None)
    }

    fn line_of(err: Error) -> u64 {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn reads_and_sums_duplicates() {
        let t = parse("src,dst,interval,count\n0,1,0,2\n0,1,0,1\n2,0,1,4\n").unwrap();
        assert_eq!((t.n_nodes(), t.n_intervals()), (3, 2));
        assert_eq!(t.get(0, 1, 0), 3);
        assert_eq!(t.total(), 7);
    }

    #[test]
    fn hypertext_row() {
        let t = read_aggregated(
            "src,dst,interval,count\n52,26,5,16\n".as_bytes(),
            Some(113),
            Some(96),
        )
        .unwrap();
        assert_eq!(t.get(52, 26, 5), 16);
        assert_eq!(t.n_intervals(), 96);
    }

    #[test]
    fn malformed_rows_report_lines() {
        assert_eq!(
            line_of(parse("src,dst,interval,count\n0,1,0,1\n0,x,0,1\n").unwrap_err()),
            3
        );
        assert_eq!(
            line_of(parse("src,dst,interval,count\n0,1,0,-3\n").unwrap_err()),
            2
        );
        assert_eq!(
            line_of(parse("src,dst,interval,count\n1,1,0,3\n").unwrap_err()),
            2
        );
        assert_eq!(
            line_of(parse("src,dst,interval,count\n0,1,0\n").unwrap_err()),
            2
        );
        assert_eq!(line_of(parse("a,b,c,d\n0,1,0,1\n").unwrap_err()), 1);
        let err = read_aggregated(
            "src,dst,interval,count\n0,5,0,1\n".as_bytes(),
            Some(3),
            None,
        );
        assert_eq!(line_of(err.unwrap_err()), 2);
        assert!(matches!(
            parse("src,dst,interval,count\n"),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let t = parse("src,dst,interval,count\n3,1,2,5\n0,1,0,2\n1,0,4,1\n").unwrap();
        let mut buf = Vec::new();
        write_aggregated(&mut buf, &t).unwrap();
        let back =
            read_aggregated(buf.as_slice(), Some(t.n_nodes()), Some(t.n_intervals())).unwrap();
        assert_eq!(back, t);
        let mut again = Vec::new();
        write_aggregated(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn stream_binning() {
        let t = read_stream("t,src,dst\n10,0,1\n25,0,1\n".as_bytes(), 20.0, 40.0, None).unwrap();
        assert_eq!((t.get(0, 1, 0), t.get(0, 1, 1)), (1, 1));
        let day = read_stream("t,src,dst\n".as_bytes(), 900.0, 86400.0, Some(2)).unwrap();
        assert_eq!(day.n_intervals(), 96);
        let err = read_stream("t,src,dst\n10,0,1\n0,0,1\n".as_bytes(), 20.0, 40.0, None);
        assert_eq!(line_of(err.unwrap_err()), 3);
        let err = read_stream("t,src,dst\n10,0,1\n".as_bytes(), 30.0, 40.0, None);
        assert!(matches!(err, Err(Error::Model(_))));
    }

    #[test]
    fn partition_json_shape() {
        let p = Partition::new(vec![0, 1, 0], vec![0, 0]).unwrap();
        let text = serde_json::to_string(&PartitionFile::from(&p)).unwrap();
        assert_eq!(
            text,
            r#"{"node_labels":[0,1,0],"interval_labels":[0,0],"K":2,"D":1}"#
        );
        let labels: Labels = serde_json::from_str(&text).unwrap();
        assert_eq!(labels.node_labels, vec![0, 1, 0]);
    }
}
