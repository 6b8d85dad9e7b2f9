//! Heterogeneous graph data model, JSON ingestion, inverse-relation
//! augmentation, split management and a schema-parameterized synthetic
//! generator.
//!
//! A graph holds typed node sets with per-type feature matrices and named
//! directed relations. Ingestion guarantees that every relation `r` has a
//! companion inverse `r~` with reversed endpoint pairs, so messages can
//! flow both ways during convolution.

use crate::error::{Error, Result};
use crate::jsonio;
use crate::tensor::Tensor;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;
use std::path::Path;

/// Suffix marking the generated inverse of a relation.
pub const INVERSE_SUFFIX: &str = "~";

#[derive(Debug, Clone, PartialEq)]
pub struct NodeTypeInfo {
    pub name: String,
    pub count: usize,
    pub feature_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub name: String,
    pub src_type: usize,
    pub dst_type: usize,
    /// Directed (source index, destination index) pairs; duplicates are
    /// allowed and count with multiplicity in mean aggregation.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Immutable heterogeneous graph with labels and splits on one target type.
#[derive(Debug, Clone, PartialEq)]
pub struct HetGraph {
    node_types: Vec<NodeTypeInfo>,
    features: Vec<Tensor>,
    relations: Vec<Relation>,
    target_type: usize,
    num_classes: usize,
    labels: Vec<usize>,
    splits: Splits,
}

impl HetGraph {
    /// Build a graph from raw parts, adding missing inverse relations and
    /// validating every structural invariant.
    pub fn new(
        node_types: Vec<NodeTypeInfo>,
        features: Vec<Tensor>,
        relations: Vec<Relation>,
        target_type: usize,
        num_classes: usize,
        labels: Vec<usize>,
        splits: Splits,
    ) -> Result<Self> {
        let relations = augment_inverses(relations)?;
        let g = HetGraph { node_types, features, relations, target_type, num_classes, labels, splits };
        g.validate()?;
        Ok(g)
    }

    pub fn node_types(&self) -> &[NodeTypeInfo] {
        &self.node_types
    }

    pub fn num_node_types(&self) -> usize {
        self.node_types.len()
    }

    pub fn type_name(&self, t: usize) -> &str {
        &self.node_types[t].name
    }

    pub fn node_count(&self, t: usize) -> usize {
        self.node_types[t].count
    }

    pub fn features(&self, t: usize) -> &Tensor {
        &self.features[t]
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Result<&Relation> {
        self.relations
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    pub fn target_type(&self) -> usize {
        self.target_type
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn splits(&self) -> &Splits {
        &self.splits
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.node_types.iter().position(|t| t.name == name)
    }

    /// Per-destination-node adjacency lists of source indices for one
    /// relation. Duplicate edges appear with multiplicity; isolated
    /// destinations get empty lists.
    pub fn neighbor_lists(&self, relation: &str) -> Result<Vec<Vec<usize>>> {
        let rel = self.relation(relation)?;
        let mut lists = vec![Vec::new(); self.node_types[rel.dst_type].count];
        for &(s, d) in &rel.edges {
            lists[d].push(s);
        }
        Ok(lists)
    }

    /// Canonical schema description: type names with counts, relation
    /// triples, and the class count. Two graphs are checkpoint-compatible
    /// exactly when these strings match.
    pub fn schema_signature(&self) -> String {
        let mut s = String::new();
        for t in &self.node_types {
            s.push_str(&format!("type:{}:{}:{};", t.name, t.count, t.feature_dim));
        }
        for r in &self.relations {
            s.push_str(&format!(
                "rel:{}:{}:{};",
                r.name, self.node_types[r.src_type].name, self.node_types[r.dst_type].name
            ));
        }
        s.push_str(&format!("target:{};classes:{}", self.node_types[self.target_type].name, self.num_classes));
        s
    }

    /// Same graph with new splits (all other fields shared).
    pub fn with_splits(&self, splits: Splits) -> Result<Self> {
        let mut g = self.clone();
        g.splits = splits;
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.node_types.is_empty() {
            return Err(Error::Validation("graph has no node types".into()));
        }
        for (i, t) in self.node_types.iter().enumerate() {
            if t.name.is_empty() {
                return Err(Error::Validation(format!("node type {} has an empty name", i)));
            }
            if self.node_types[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::Validation(format!("duplicate node type name '{}'", t.name)));
            }
        }
        if self.features.len() != self.node_types.len() {
            return Err(Error::Validation(format!(
                "feature matrices ({}) do not match node types ({})",
                self.features.len(),
                self.node_types.len()
            )));
        }
        for (t, feats) in self.features.iter().enumerate() {
            let info = &self.node_types[t];
            if feats.shape() != (info.count, info.feature_dim) {
                return Err(Error::Validation(format!(
                    "features of type '{}' have shape {}x{}, expected {}x{}",
                    info.name,
                    feats.rows(),
                    feats.cols(),
                    info.count,
                    info.feature_dim
                )));
            }
            if !feats.all_finite() {
                return Err(Error::Validation(format!(
                    "features of type '{}' contain non-finite values",
                    info.name
                )));
            }
        }
        for (i, r) in self.relations.iter().enumerate() {
            if self.relations[..i].iter().any(|o| o.name == r.name) {
                return Err(Error::Validation(format!("duplicate relation name '{}'", r.name)));
            }
            if r.src_type >= self.node_types.len() || r.dst_type >= self.node_types.len() {
                return Err(Error::Validation(format!("relation '{}' references an unknown node type", r.name)));
            }
            let (ns, nd) = (self.node_types[r.src_type].count, self.node_types[r.dst_type].count);
            if let Some(&(s, d)) = r.edges.iter().find(|&&(s, d)| s >= ns || d >= nd) {
                return Err(Error::Validation(format!(
                    "relation '{}' edge ({}, {}) out of range ({} source, {} destination nodes)",
                    r.name, s, d, ns, nd
                )));
            }
        }
        // inverse closure: every relation has a companion with exactly the
        // reversed edge list
        for r in &self.relations {
            let companion = inverse_name(&r.name);
            let inv = self.relations.iter().find(|o| o.name == companion).ok_or_else(|| {
                Error::Validation(format!("relation '{}' lacks inverse companion '{}'", r.name, companion))
            })?;
            if inv.src_type != r.dst_type || inv.dst_type != r.src_type {
                return Err(Error::Validation(format!(
                    "relation '{}' and companion '{}' disagree on endpoint types",
                    r.name, companion
                )));
            }
            if inv.edges.len() != r.edges.len()
                || !r.edges.iter().zip(&inv.edges).all(|(&(s, d), &(is, id))| s == id && d == is)
            {
                return Err(Error::Validation(format!(
                    "relation '{}' edges are not the exact reversal of '{}'",
                    companion, r.name
                )));
            }
        }
        if self.target_type >= self.node_types.len() {
            return Err(Error::Validation(format!("target type index {} out of range", self.target_type)));
        }
        if self.num_classes == 0 {
            return Err(Error::Validation("num_classes must be at least 1".into()));
        }
        let n_target = self.node_types[self.target_type].count;
        if self.labels.len() != n_target {
            return Err(Error::Validation(format!(
                "{} labels for {} target nodes",
                self.labels.len(),
                n_target
            )));
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= self.num_classes) {
            return Err(Error::Validation(format!("label {} exceeds num_classes {}", bad, self.num_classes)));
        }
        let mut seen = vec![false; n_target];
        for (name, split) in [("train", &self.splits.train), ("val", &self.splits.val), ("test", &self.splits.test)] {
            for &i in split {
                if i >= n_target {
                    return Err(Error::Validation(format!("{} split index {} out of range", name, i)));
                }
                if seen[i] {
                    return Err(Error::Validation(format!("target node {} appears in two splits", i)));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }
}

/// Inverse companion name: `r` ↔ `r~`.
pub fn inverse_name(name: &str) -> String {
    match name.strip_suffix(INVERSE_SUFFIX) {
        Some(base) => base.to_string(),
        None => format!("{}{}", name, INVERSE_SUFFIX),
    }
}

fn augment_inverses(mut relations: Vec<Relation>) -> Result<Vec<Relation>> {
    for r in &relations {
        if r.name.ends_with(INVERSE_SUFFIX)
            && !relations.iter().any(|o| o.name == inverse_name(&r.name))
        {
            return Err(Error::Validation(format!(
                "relation '{}' uses the inverse suffix but has no base relation",
                r.name
            )));
        }
    }
    let missing: Vec<Relation> = relations
        .iter()
        .filter(|r| !r.name.ends_with(INVERSE_SUFFIX))
        .filter(|r| !relations.iter().any(|o| o.name == inverse_name(&r.name)))
        .map(|r| Relation {
            name: inverse_name(&r.name),
            src_type: r.dst_type,
            dst_type: r.src_type,
            edges: r.edges.iter().map(|&(s, d)| (d, s)).collect(),
        })
        .collect();
    relations.extend(missing);
    Ok(relations)
}

// ── JSON interchange ─────────────────────────────────────────────────

#[derive(Deserialize)]
struct NodeTypeFile {
    name: String,
    count: usize,
    feature_dim: usize,
}

#[derive(Deserialize)]
struct RelationFile {
    name: String,
    src: String,
    dst: String,
    edges: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
struct SplitsFile {
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
}

#[derive(Deserialize)]
struct GraphFile {
    node_types: Vec<NodeTypeFile>,
    features: Vec<Vec<f64>>,
    relations: Vec<RelationFile>,
    target_type: usize,
    num_classes: usize,
    labels: Vec<usize>,
    splits: SplitsFile,
}

/// Load and validate a graph file, adding inverse relations for any base
/// relation that lacks a companion.
pub fn load_graph(path: &Path) -> Result<HetGraph> {
    let text = std::fs::read_to_string(path)?;
    parse_graph(&text)
}

/// Parse a graph from its JSON text form.
pub fn parse_graph(text: &str) -> Result<HetGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.features.len() != file.node_types.len() {
        return Err(Error::Validation(format!(
            "feature matrices ({}) do not match node types ({})",
            file.features.len(),
            file.node_types.len()
        )));
    }
    let mut features = Vec::with_capacity(file.node_types.len());
    for (t, values) in file.node_types.iter().zip(file.features) {
        let tensor = Tensor::new(t.count, t.feature_dim, values).map_err(|_| {
            Error::Validation(format!(
                "features of type '{}' do not contain count*feature_dim values",
                t.name
            ))
        })?;
        features.push(tensor);
    }
    let type_index = |name: &str| -> Result<usize> {
        file.node_types
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| Error::Validation(format!("relation references unknown node type '{}'", name)))
    };
    let mut relations = Vec::with_capacity(file.relations.len());
    for r in &file.relations {
        relations.push(Relation {
            name: r.name.clone(),
            src_type: type_index(&r.src)?,
            dst_type: type_index(&r.dst)?,
            edges: r.edges.clone(),
        });
    }
    HetGraph::new(
        file.node_types
            .into_iter()
            .map(|t| NodeTypeInfo { name: t.name, count: t.count, feature_dim: t.feature_dim })
            .collect(),
        features,
        relations,
        file.target_type,
        file.num_classes,
        file.labels,
        Splits { train: file.splits.train, val: file.splits.val, test: file.splits.test },
    )
}

/// Serialize a graph to its canonical JSON text form: fixed key order, no
/// whitespace, floats with 17 significant digits. Byte-identical for equal
/// graphs.
pub fn serialize_graph(g: &HetGraph) -> String {
    let mut out = String::new();
    out.push_str("{\"node_types\":[");
    for (i, t) in g.node_types.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"name\":");
        jsonio::push_str(&mut out, &t.name);
        out.push_str(&format!(",\"count\":{},\"feature_dim\":{}}}", t.count, t.feature_dim));
    }
    out.push_str("],\"features\":[");
    for (i, f) in g.features.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        jsonio::push_f64_array(&mut out, f.data());
    }
    out.push_str("],\"relations\":[");
    for (i, r) in g.relations.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"name\":");
        jsonio::push_str(&mut out, &r.name);
        out.push_str(",\"src\":");
        jsonio::push_str(&mut out, g.type_name(r.src_type));
        out.push_str(",\"dst\":");
        jsonio::push_str(&mut out, g.type_name(r.dst_type));
        out.push_str(",\"edges\":[");
        for (j, &(s, d)) in r.edges.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("[{},{}]", s, d));
        }
        out.push_str("]}");
    }
    out.push_str(&format!(
        "],\"target_type\":{},\"num_classes\":{},\"labels\":",
        g.target_type, g.num_classes
    ));
    jsonio::push_usize_array(&mut out, &g.labels);
    out.push_str(",\"splits\":{\"train\":");
    jsonio::push_usize_array(&mut out, &g.splits.train);
    out.push_str(",\"val\":");
    jsonio::push_usize_array(&mut out, &g.splits.val);
    out.push_str(",\"test\":");
    jsonio::push_usize_array(&mut out, &g.splits.test);
    out.push_str("}}");
    out
}

/// Write a graph file.
pub fn save_graph(g: &HetGraph, path: &Path) -> Result<()> {
    std::fs::write(path, serialize_graph(g))?;
    Ok(())
}

// ── Synthetic generation ─────────────────────────────────────────────

#[derive(Debug, Clone, Deserialize)]
pub struct SchemaNodeType {
    pub name: String,
    pub count: usize,
    pub feature_dim: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SchemaRelation {
    pub name: String,
    pub src: String,
    pub dst: String,
    pub edge_count: usize,
}

/// Parameters of the synthetic benchmark generator. Shapes mirror real
/// bibliographic/movie datasets; `intra_class_affinity` controls how often
/// an edge connects nodes whose latent classes agree, `class_separation`
/// scales the distance between class-conditional feature means, and
/// `label_noise_rate` resamples that fraction of observed labels uniformly
/// among the other classes.
#[derive(Debug, Clone, Deserialize)]
pub struct SyntheticSchema {
    pub node_types: Vec<SchemaNodeType>,
    pub relations: Vec<SchemaRelation>,
    pub target_type: String,
    pub num_classes: usize,
    pub intra_class_affinity: f64,
    pub class_separation: f64,
    pub label_noise_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSchema {
    pub fn validate(&self) -> Result<()> {
        if self.node_types.is_empty() {
            return Err(Error::Config("schema has no node types".into()));
        }
        for t in &self.node_types {
            if t.count == 0 {
                return Err(Error::Config(format!("node type '{}' has count 0", t.name)));
            }
            if t.feature_dim == 0 {
                return Err(Error::Config(format!("node type '{}' has feature_dim 0", t.name)));
            }
        }
        let index = |name: &str| self.node_types.iter().position(|t| t.name == name);
        if index(&self.target_type).is_none() {
            return Err(Error::Config(format!("unknown target type '{}'", self.target_type)));
        }
        for r in &self.relations {
            let (s, d) = match (index(&r.src), index(&r.dst)) {
                (Some(s), Some(d)) => (s, d),
                _ => {
                    return Err(Error::Config(format!(
                        "relation '{}' references an unknown node type",
                        r.name
                    )))
                }
            };
            let pairs = self.node_types[s].count * self.node_types[d].count;
            if r.edge_count > pairs {
                return Err(Error::Config(format!(
                    "relation '{}' requests {} edges but only {} distinct pairs exist",
                    r.name, r.edge_count, pairs
                )));
            }
        }
        if !(self.intra_class_affinity > 0.0 && self.intra_class_affinity < 1.0) {
            return Err(Error::Config(format!(
                "intra_class_affinity must lie in (0,1), got {}",
                self.intra_class_affinity
            )));
        }
        if self.class_separation < 0.0 {
            return Err(Error::Config(format!(
                "class_separation must be >= 0, got {}",
                self.class_separation
            )));
        }
        if !(0.0..1.0).contains(&self.label_noise_rate) {
            return Err(Error::Config(format!(
                "label_noise_rate must lie in [0,1), got {}",
                self.label_noise_rate
            )));
        }
        if self.num_classes == 0 {
            return Err(Error::Config("num_classes must be at least 1".into()));
        }
        Ok(())
    }

    /// Scale node and edge counts by `factor` (at least one node per type
    /// and `num_classes` target nodes survive scaling).
    pub fn scaled(&self, factor: f64) -> Result<SyntheticSchema> {
        if !(factor > 0.0) {
            return Err(Error::Config(format!("scale factor must be positive, got {}", factor)));
        }
        let mut s = self.clone();
        for t in &mut s.node_types {
            let scaled = ((t.count as f64) * factor).round() as usize;
            let floor = if t.name == s.target_type { s.num_classes.max(1) } else { 1 };
            t.count = scaled.max(floor);
        }
        for r in &mut s.relations {
            r.edge_count = ((r.edge_count as f64) * factor).round().max(1.0) as usize;
        }
        s.validate()?;
        Ok(s)
    }
}

/// Box-Muller standard normal draw: two uniforms per sample, deterministic
/// for a fixed rng state.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generate a graph plus the latent (noise-free) class of every target
/// node. [`generate_synthetic`] is the plain entry point; the latent
/// classes are exposed for tests and diagnostics.
pub fn generate_with_latent<R: Rng>(
    schema: &SyntheticSchema,
    rng: &mut R,
) -> Result<(HetGraph, Vec<usize>)> {
    schema.validate()?;
    let n_types = schema.node_types.len();
    let type_index =
        |name: &str| schema.node_types.iter().position(|t| t.name == name).expect("validated");
    let target = type_index(&schema.target_type);
    let k = schema.num_classes;

    // latent class per node of every type
    let latent: Vec<Vec<usize>> = schema
        .node_types
        .iter()
        .map(|t| (0..t.count).map(|_| rng.gen_range(0..k)).collect())
        .collect();
    // per type, node indices grouped by class (for aligned edge sampling)
    let by_class: Vec<Vec<Vec<usize>>> = latent
        .iter()
        .map(|classes| {
            let mut groups = vec![Vec::new(); k];
            for (i, &c) in classes.iter().enumerate() {
                groups[c].push(i);
            }
            groups
        })
        .collect();

    let mut relations = Vec::with_capacity(schema.relations.len());
    for r in &schema.relations {
        let (s_t, d_t) = (type_index(&r.src), type_index(&r.dst));
        let (ns, nd) = (schema.node_types[s_t].count, schema.node_types[d_t].count);
        let mut edges = Vec::with_capacity(r.edge_count);
        for _ in 0..r.edge_count {
            let s = rng.gen_range(0..ns);
            let class_pool = &by_class[d_t][latent[s_t][s]];
            let d = if rng.gen_bool(schema.intra_class_affinity) && !class_pool.is_empty() {
                class_pool[rng.gen_range(0..class_pool.len())]
            } else {
                rng.gen_range(0..nd)
            };
            edges.push((s, d));
        }
        relations.push(Relation { name: r.name.clone(), src_type: s_t, dst_type: d_t, edges });
    }

    // class-conditional feature mean: mu * onehot(c mod dim)
    let class_mean = |c: usize, dim: usize| -> Vec<f64> {
        let mut m = vec![0.0; dim];
        m[c % dim] = schema.class_separation;
        m
    };

    // neighbor-class mixture weights for non-target nodes, across all
    // generated relations touching the type
    let mut neighbor_class_counts: Vec<Vec<Vec<f64>>> =
        schema.node_types.iter().map(|t| vec![vec![0.0; k]; t.count]).collect();
    for rel in &relations {
        for &(s, d) in &rel.edges {
            neighbor_class_counts[rel.src_type][s][latent[rel.dst_type][d]] += 1.0;
            neighbor_class_counts[rel.dst_type][d][latent[rel.src_type][s]] += 1.0;
        }
    }

    let mut features = Vec::with_capacity(n_types);
    for (t, info) in schema.node_types.iter().enumerate() {
        let dim = info.feature_dim;
        let mut data = Vec::with_capacity(info.count * dim);
        for i in 0..info.count {
            let mean: Vec<f64> = if t == target {
                class_mean(latent[t][i], dim)
            } else {
                let counts = &neighbor_class_counts[t][i];
                let total: f64 = counts.iter().sum();
                if total > 0.0 {
                    let mut m = vec![0.0; dim];
                    for (c, &w) in counts.iter().enumerate() {
                        let cm = class_mean(c, dim);
                        for (mv, cv) in m.iter_mut().zip(cm) {
                            *mv += (w / total) * cv;
                        }
                    }
                    m
                } else {
                    class_mean(latent[t][i], dim)
                }
            };
            for m in mean {
                data.push(m + standard_normal(rng));
            }
        }
        features.push(Tensor::new(info.count, dim, data).expect("sized by construction"));
    }

    let latent_target = latent[target].clone();
    let mut labels = latent_target.clone();
    if schema.label_noise_rate > 0.0 && k > 1 {
        for label in &mut labels {
            if rng.gen_bool(schema.label_noise_rate) {
                let offset = rng.gen_range(1..k);
                *label = (*label + offset) % k;
            }
        }
    }

    let node_types = schema
        .node_types
        .iter()
        .map(|t| NodeTypeInfo { name: t.name.clone(), count: t.count, feature_dim: t.feature_dim })
        .collect();
    let g = HetGraph::new(node_types, features, relations, target, k, labels, Splits::default())?;
    Ok((g, latent_target))
}

/// Generate a synthetic heterogeneous graph. Deterministic for a fixed
/// rng state; splits are left empty (see [`split_target_nodes`]).
pub fn generate_synthetic<R: Rng>(schema: &SyntheticSchema, rng: &mut R) -> Result<HetGraph> {
    generate_with_latent(schema, rng).map(|(g, _)| g)
}

/// Assign train/validation/test splits over the target nodes: a
/// deterministic shuffle, then the first ⌊0.2N⌋ nodes form the full train
/// pool, the next ⌊0.1N⌋ validation, the remainder test. The train split
/// is the first `train_fraction` portion of the train pool.
pub fn split_target_nodes<R: Rng>(g: &HetGraph, train_fraction: f64, rng: &mut R) -> Result<HetGraph> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "train_fraction must lie in (0,1], got {}",
            train_fraction
        )));
    }
    let n = g.node_count(g.target_type());
    if n < g.num_classes() {
        return Err(Error::Degenerate(format!(
            "{} target nodes cannot cover {} classes",
            n,
            g.num_classes()
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let pool_len = n / 5; // ⌊0.2N⌋
    let val_len = n / 10; // ⌊0.1N⌋
    let pool = &order[..pool_len];
    let val = order[pool_len..pool_len + val_len].to_vec();
    let test = order[pool_len + val_len..].to_vec();
    let train_len = ((pool_len as f64) * train_fraction).floor() as usize;
    let train = pool[..train_len].to_vec();
    g.with_splits(Splits { train, val, test })
}
