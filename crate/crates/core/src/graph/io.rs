//! Snapshot directories (`nodes.tsv` + `edges.tsv`) and GraphML export.
//!
//! `nodes.tsv` starts with a header naming its columns; only `id` is
//! required, `title`, `year`, `depth` and `fully_resolved` are optional.
//! `edges.tsv` has the header `citing_id	cited_id` for citation graphs and
//! `node_a	node_b` for undirected ones.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CitationGraph, GraphBuilder, GraphError, NodeAttrs};

pub const NODES_FILE: &str = "nodes.tsv";
pub const EDGES_FILE: &str = "edges.tsv";
const NODE_COLUMNS: [&str; 5] = ["id", "title", "year", "depth", "fully_resolved"];
const DIRECTED_HEADER: &str = "citing_id\tcited_id";
const UNDIRECTED_HEADER: &str = "node_a\tnode_b";

fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

pub fn nodes_tsv(g: &CitationGraph) -> String {
    let mut out = NODE_COLUMNS.join("\t");
    out.push('\n');
    for (i, id) in g.ids().iter().enumerate() {
        let a = g.attrs(i);
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            clean(id),
            a.title.as_deref().map(clean).unwrap_or_default(),
            a.year.map(|y| y.to_string()).unwrap_or_default(),
            a.depth,
            a.fully_resolved
        );
    }
    out
}

pub fn edges_tsv(g: &CitationGraph) -> String {
    let mut out = String::from(if g.is_directed() { DIRECTED_HEADER } else { UNDIRECTED_HEADER });
    out.push('\n');
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{}\t{}", g.id(u as usize), g.id(v as usize));
    }
    out
}

pub fn write_snapshot(g: &CitationGraph, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(NODES_FILE), nodes_tsv(g))?;
    fs::write(dir.join(EDGES_FILE), edges_tsv(g))
}

pub fn read_snapshot(dir: &Path) -> Result<CitationGraph, GraphError> {
    let nodes = fs::read_to_string(dir.join(NODES_FILE))?;
    let edges = fs::read_to_string(dir.join(EDGES_FILE))?;
    parse_snapshot(&nodes, &edges)
}

fn parse_error(file: &str, line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

pub fn parse_snapshot(nodes: &str, edges: &str) -> Result<CitationGraph, GraphError> {
    let mut builder = GraphBuilder::new();

    let mut lines = data_lines(nodes);
    let (_, header) = lines.next().ok_or_else(|| parse_error(NODES_FILE, 1, "missing header"))?;
    let columns: Vec<&str> = header.split('\t').map(str::trim).collect();
    let col = |name: &str| columns.iter().position(|c| *c == name);
    let id_col = col("id").ok_or_else(|| parse_error(NODES_FILE, 1, "no `id` column"))?;
    let (title_col, year_col, depth_col, resolved_col) =
        (col("title"), col("year"), col("depth"), col("fully_resolved"));

    for (line, text) in lines {
        let fields: Vec<&str> = text.split('\t').collect();
        let field = |c: Option<usize>| c.and_then(|c| fields.get(c)).map(|f| f.trim()).filter(|f| !f.is_empty());
        let id = field(Some(id_col)).ok_or_else(|| parse_error(NODES_FILE, line, "empty id"))?;
        if builder.contains(id) {
            return Err(parse_error(NODES_FILE, line, format!("duplicate id `{id}`")));
        }
        let year = field(year_col)
            .map(|y| y.parse::<i32>().map_err(|_| parse_error(NODES_FILE, line, format!("invalid year `{y}`"))))
            .transpose()?;
        let depth = field(depth_col)
            .map(|d| match d.parse::<u8>() {
                Ok(d) if d <= 2 => Ok(d),
                _ => Err(parse_error(NODES_FILE, line, format!("invalid depth `{d}`"))),
            })
            .transpose()?
            .unwrap_or(NodeAttrs::default().depth);
        let fully_resolved = match field(resolved_col) {
            None | Some("false") | Some("0") => false,
            Some("true") | Some("1") => true,
            Some(other) => return Err(parse_error(NODES_FILE, line, format!("invalid flag `{other}`"))),
        };
        builder.add_node(
            id,
            NodeAttrs {
                depth,
                fully_resolved,
                title: field(title_col).map(str::to_string),
                year,
            },
        );
    }

    let mut lines = data_lines(edges);
    let (_, header) = lines.next().ok_or_else(|| parse_error(EDGES_FILE, 1, "missing header"))?;
    let directed = match header.trim() {
        DIRECTED_HEADER => true,
        UNDIRECTED_HEADER => false,
        other => return Err(parse_error(EDGES_FILE, 1, format!("unexpected header `{other}`"))),
    };
    for (line, text) in lines {
        let fields: Vec<&str> = text.split('\t').map(str::trim).collect();
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(parse_error(EDGES_FILE, line, "expected two ids"));
        }
        for id in &fields {
            if !builder.contains(id) {
                return Err(parse_error(EDGES_FILE, line, format!("unknown node `{id}`")));
            }
        }
        builder.add_edge(fields[0], fields[1]);
    }
    Ok(if directed {
        builder.build()
    } else {
        builder.build_undirected()
    })
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => {}
            c => out.push(c),
        }
    }
    out
}

/// GraphML document with node attributes `depth`, `fully_resolved`,
/// `title`, `year` and, when labels are given, `community`.
pub fn to_graphml(g: &CitationGraph, communities: Option<&[u32]>) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    let keys = [
        ("community", "int"),
        ("depth", "int"),
        ("fully_resolved", "boolean"),
        ("title", "string"),
        ("year", "int"),
    ];
    for (name, ty) in keys {
        if name == "community" && communities.is_none() {
            continue;
        }
        let _ = writeln!(out, "  <key id=\"{name}\" for=\"node\" attr.name=\"{name}\" attr.type=\"{ty}\"/>");
    }
    let kind = if g.is_directed() { "directed" } else { "undirected" };
    let _ = writeln!(out, "  <graph id=\"G\" edgedefault=\"{kind}\">");
    for (i, id) in g.ids().iter().enumerate() {
        let a = g.attrs(i);
        let _ = writeln!(out, "    <node id=\"{}\">", xml_escape(id));
        if let Some(labels) = communities {
            let _ = writeln!(out, "      <data key=\"community\">{}</data>", labels[i]);
        }
        let _ = writeln!(out, "      <data key=\"depth\">{}</data>", a.depth);
        let _ = writeln!(out, "      <data key=\"fully_resolved\">{}</data>", a.fully_resolved);
        if let Some(t) = &a.title {
            let _ = writeln!(out, "      <data key=\"title\">{}</data>", xml_escape(t));
        }
        if let Some(y) = a.year {
            let _ = writeln!(out, "      <data key=\"year\">{y}</data>");
        }
        out.push_str("    </node>\n");
    }
    for &(u, v) in g.edges() {
        let _ = writeln!(
            out,
            "    <edge source=\"{}\" target=\"{}\"/>",
            xml_escape(g.id(u as usize)),
            xml_escape(g.id(v as usize))
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
