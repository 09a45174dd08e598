//! CSV rows and the aggregate mean ± standard deviation table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use manet_core::metrics::mean_std;
use manet_core::{DropCause, MetricsRow};

use crate::sweep::Axis;

/// Column order of the results CSV.
pub const COLUMNS: [&str; 16] = [
    "protocol",
    "scenario_id",
    "seed",
    "n_nodes",
    "pause_s",
    "rate_pps",
    "sent",
    "delivered",
    "delivery_ratio",
    "mean_delay_ms",
    "transmissions_total",
    "drop_ttl",
    "drop_link",
    "drop_timeout",
    "drop_buffer",
    "drop_perimeter",
];

const DROP_ORDER: [DropCause; 5] =
    [DropCause::Ttl, DropCause::LinkFailure, DropCause::DiscoveryTimeout, DropCause::Buffer, DropCause::PerimeterExhausted];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    BadValue { row: usize, column: &'static str, value: String },
}

/// One CSV line: the identification columns and counters of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub protocol: String,
    pub scenario_id: String,
    pub seed: u64,
    pub n_nodes: u32,
    pub pause_s: f64,
    pub rate_pps: f64,
    pub sent: u64,
    pub delivered: u64,
    pub delivery_ratio: f64,
    pub mean_delay_ms: Option<f64>,
    pub transmissions_total: u64,
    /// In [`COLUMNS`] order: ttl, link, timeout, buffer, perimeter.
    pub drops: [u64; 5],
}

impl From<&MetricsRow> for ResultRow {
    fn from(r: &MetricsRow) -> Self {
        ResultRow {
            protocol: r.protocol.clone(),
            scenario_id: r.scenario_id.clone(),
            seed: r.seed,
            n_nodes: r.n_nodes,
            pause_s: r.pause_s,
            rate_pps: r.rate_pps,
            sent: r.sent,
            delivered: r.delivered,
            delivery_ratio: r.delivery_ratio,
            mean_delay_ms: r.mean_delay_ms,
            transmissions_total: r.transmissions_total,
            drops: DROP_ORDER.map(|c| r.drops.get(c)),
        }
    }
}

impl ResultRow {
    fn fields(&self) -> Vec<String> {
        let mut v = vec![
            self.protocol.clone(),
            self.scenario_id.clone(),
            self.seed.to_string(),
            self.n_nodes.to_string(),
            self.pause_s.to_string(),
            self.rate_pps.to_string(),
            self.sent.to_string(),
            self.delivered.to_string(),
            self.delivery_ratio.to_string(),
            self.mean_delay_ms.map_or_else(String::new, |d| d.to_string()),
            self.transmissions_total.to_string(),
        ];
        v.extend(self.drops.iter().map(u64::to_string));
        v
    }

    /// Packets neither delivered nor dropped when the run ended.
    pub fn in_flight(&self) -> Option<u64> {
        self.sent.checked_sub(self.delivered + self.drops.iter().sum::<u64>())
    }

    pub fn axis_value(&self, axis: Axis) -> String {
        match axis {
            Axis::Rate => self.rate_pps.to_string(),
            Axis::Pause => self.pause_s.to_string(),
            Axis::NNodes => self.n_nodes.to_string(),
            Axis::Protocol => "all".to_string(),
        }
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a results CSV. The delivery-ratio column may also be headed
/// `throughput`.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>, ReportError> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers()?.clone();
    let col = |name: &'static str| -> Result<usize, ReportError> {
        let find = |n: &str| headers.iter().position(|h| h.trim() == n);
        find(name)
            .or_else(|| if name == "delivery_ratio" { find("throughput") } else { None })
            .ok_or(ReportError::MissingColumn(name))
    };
    let idx: Vec<usize> = COLUMNS.iter().map(|c| col(c)).collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (n, rec) in rd.records().enumerate() {
        let rec = rec?;
        let get = |i: usize| rec.get(idx[i]).unwrap_or("").trim();
        fn num<T: std::str::FromStr>(row: usize, column: &'static str, s: &str) -> Result<T, ReportError> {
            s.parse().map_err(|_| ReportError::BadValue { row, column, value: s.to_string() })
        }
        let row = n + 1;
        let p = |i: usize| (COLUMNS[i], get(i));
        let (c, s) = p(9);
        let mean_delay_ms = if s.is_empty() { None } else { Some(num(row, c, s)?) };
        let mut drops = [0u64; 5];
        for (k, d) in drops.iter_mut().enumerate() {
            let (c, s) = p(11 + k);
            *d = num(row, c, s)?;
        }
        rows.push(ResultRow {
            protocol: get(0).to_string(),
            scenario_id: get(1).to_string(),
            seed: num(row, COLUMNS[2], get(2))?,
            n_nodes: num(row, COLUMNS[3], get(3))?,
            pause_s: num(row, COLUMNS[4], get(4))?,
            rate_pps: num(row, COLUMNS[5], get(5))?,
            sent: num(row, COLUMNS[6], get(6))?,
            delivered: num(row, COLUMNS[7], get(7))?,
            delivery_ratio: num(row, COLUMNS[8], get(8))?,
            mean_delay_ms,
            transmissions_total: num(row, COLUMNS[10], get(10))?,
            drops,
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

fn stat(xs: &[f64]) -> Option<Stat> {
    mean_std(xs).map(|(mean, std)| Stat { mean, std, n: xs.len() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub runs: usize,
    pub delivery_ratio: Stat,
    /// Over runs that delivered at least one packet.
    pub mean_delay_ms: Option<Stat>,
    pub transmissions: Stat,
}

/// Per-cell means and sample standard deviations, axis values down,
/// protocols across. Orders follow first appearance in the rows.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateTable {
    pub axis: Axis,
    pub axis_values: Vec<String>,
    pub protocols: Vec<String>,
    pub cells: BTreeMap<(usize, usize), CellStats>,
}

pub fn aggregate(rows: &[ResultRow], axis: Axis) -> AggregateTable {
    let mut axis_values: Vec<String> = Vec::new();
    let mut protocols: Vec<String> = Vec::new();
    let mut groups: BTreeMap<(usize, usize), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        let v = r.axis_value(axis);
        let a = axis_values.iter().position(|x| *x == v).unwrap_or_else(|| {
            axis_values.push(v);
            axis_values.len() - 1
        });
        let p = protocols.iter().position(|x| *x == r.protocol).unwrap_or_else(|| {
            protocols.push(r.protocol.clone());
            protocols.len() - 1
        });
        groups.entry((a, p)).or_default().push(r);
    }
    let cells = groups
        .into_iter()
        .map(|(k, g)| {
            let ratio: Vec<f64> = g.iter().map(|r| r.delivery_ratio).collect();
            let delay: Vec<f64> = g.iter().filter_map(|r| r.mean_delay_ms).collect();
            let tx: Vec<f64> = g.iter().map(|r| r.transmissions_total as f64).collect();
            let cell = CellStats {
                runs: g.len(),
                delivery_ratio: stat(&ratio).expect("group is non-empty"),
                mean_delay_ms: stat(&delay),
                transmissions: stat(&tx).expect("group is non-empty"),
            };
            (k, cell)
        })
        .collect();
    AggregateTable { axis, axis_values, protocols, cells }
}

impl AggregateTable {
    /// Aligned text: one block per metric.
    pub fn render(&self) -> String {
        type Pick = fn(&CellStats) -> Option<Stat>;
        let metrics: [(&str, Pick, usize); 3] = [
            ("delivery_ratio", |c| Some(c.delivery_ratio), 4),
            ("mean_delay_ms", |c| c.mean_delay_ms, 2),
            ("transmissions_total", |c| Some(c.transmissions), 0),
        ];
        let mut out = String::new();
        for (title, pick, prec) in metrics {
            let mut grid: Vec<Vec<String>> = Vec::new();
            let mut header = vec![self.axis.name().to_string()];
            header.extend(self.protocols.iter().cloned());
            grid.push(header);
            for (a, v) in self.axis_values.iter().enumerate() {
                let mut line = vec![v.clone()];
                for p in 0..self.protocols.len() {
                    let text = match self.cells.get(&(a, p)).and_then(pick) {
                        Some(s) => format!("{:.prec$} ± {:.prec$} (n={})", s.mean, s.std, s.n),
                        None => "-".to_string(),
                    };
                    line.push(text);
                }
                grid.push(line);
            }
            let widths: Vec<usize> = (0..grid[0].len())
                .map(|c| grid.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
                .collect();
            let _ = writeln!(out, "{title} (mean ± sample std)");
            for line in &grid {
                let cells: Vec<String> =
                    line.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}", w = *w)).collect();
                let _ = writeln!(out, "  {}", cells.join("  ").trim_end());
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(protocol: &str, pause: f64, seed: u64, delivered: u64, delay: Option<f64>) -> ResultRow {
        ResultRow {
            protocol: protocol.into(),
            scenario_id: "t".into(),
            seed,
            n_nodes: 30,
            pause_s: pause,
            rate_pps: 4.0,
            sent: 10,
            delivered,
            delivery_ratio: delivered as f64 / 10.0,
            mean_delay_ms: delay,
            transmissions_total: 100 + delivered,
            drops: [0, 10 - delivered, 0, 0, 0],
        }
    }

    #[test]
    fn empty_rows_give_header_only_csv() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", COLUMNS.join(",")));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![row("aodv", 0.0, 1, 8, Some(12.345678901234)), row("crp", 10.0, 2, 0, None)];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn throughput_alias_is_accepted() {
        let rows = vec![row("gpsr", 0.0, 1, 5, Some(3.0))];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("delivery_ratio", "throughput", 1);
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
        let broken = text.replacen("throughput", "nothing", 1);
        assert!(matches!(read_csv(broken.as_bytes()), Err(ReportError::MissingColumn("delivery_ratio"))));
    }

    #[test]
    fn aggregation_groups_and_averages() {
        let rows = vec![
            row("aodv", 0.0, 1, 8, Some(10.0)),
            row("aodv", 0.0, 2, 6, Some(20.0)),
            row("aodv", 0.0, 3, 7, Some(30.0)),
            row("gpsr", 0.0, 1, 10, None),
            row("aodv", 40.0, 1, 9, Some(5.0)),
        ];
        let t = aggregate(&rows, Axis::Pause);
        assert_eq!(t.axis_values, ["0", "40"]);
        assert_eq!(t.protocols, ["aodv", "gpsr"]);
        let c = &t.cells[&(0, 0)];
        assert_eq!(c.runs, 3);
        assert!((c.delivery_ratio.mean - 0.7).abs() < 1e-12);
        assert!((c.delivery_ratio.std - 0.1).abs() < 1e-12);
        assert_eq!(c.mean_delay_ms.unwrap().mean, 20.0);
        assert_eq!(c.mean_delay_ms.unwrap().std, 10.0);
        assert_eq!(t.cells[&(0, 1)].mean_delay_ms, None);
        assert!(!t.cells.contains_key(&(1, 1)));
        let text = t.render();
        assert!(text.contains("0.7000 ± 0.1000 (n=3)"));
        assert!(text.contains("20.00 ± 10.00 (n=3)"));
    }
}
