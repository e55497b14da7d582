//! Top-down decision-tree induction over categorical attributes using
//! information gain, plus classification and JSON serialization.
//!
//! Induction follows the classic greedy recursion: a pure sample becomes
//! a leaf; an exhausted attribute list becomes a majority leaf; otherwise
//! the sample is split on the attribute with the highest information
//! gain, one branch per value present in the sample. Ties are broken by
//! attribute order, and majority ties by the fixed class order
//! High, Medium, Low, so induction is fully deterministic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::{Band, CategoricalRecord};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum DtreeError {
    #[error("class counts are all zero")]
    AllZeroCounts,
    #[error("unknown attribute {name:?}")]
    UnknownAttribute { name: String },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("record is missing attribute {name:?}")]
    MissingAttribute { name: String },
    #[error("malformed tree: {0}")]
    MalformedTree(String),
}

/// Per-class record counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    counts: [usize; 3],
}

impl ClassCounts {
    pub fn new(high: usize, medium: usize, low: usize) -> Self {
        Self {
            counts: [high, medium, low],
        }
    }

    pub fn from_classes<'a>(classes: impl IntoIterator<Item = &'a Band>) -> Self {
        let mut c = Self::default();
        for band in classes {
            c.add(*band);
        }
        c
    }

    pub fn add(&mut self, band: Band) {
        self.counts[Self::index(band)] += 1;
    }

    pub fn get(&self, band: Band) -> usize {
        self.counts[Self::index(band)]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Majority class; count ties go to the earliest band in
    /// High, Medium, Low order.
    pub fn majority(&self) -> Option<Band> {
        if self.total() == 0 {
            return None;
        }
        let mut best = Band::High;
        for band in Band::ALL {
            if self.get(band) > self.get(best) {
                best = band;
            }
        }
        Some(best)
    }

    fn index(band: Band) -> usize {
        match band {
            Band::High => 0,
            Band::Medium => 1,
            Band::Low => 2,
        }
    }
}

/// Shannon entropy (base 2) of a class distribution, with 0·log 0 = 0.
pub fn entropy<T: Real>(class_counts: &ClassCounts) -> Result<T, DtreeError> {
    let total = class_counts.total();
    if total == 0 {
        return Err(DtreeError::AllZeroCounts);
    }
    let total = T::from_count(total);
    let mut h = T::zero();
    for band in Band::ALL {
        let n = class_counts.get(band);
        if n > 0 {
            let p = T::from_count(n) / total;
            h = h - p * p.log2();
        }
    }
    Ok(h)
}

/// A training sample plus the attributes still available for splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingView {
    records: Vec<CategoricalRecord>,
    attributes: Vec<String>,
}

impl TrainingView {
    pub fn new(
        records: Vec<CategoricalRecord>,
        attributes: Vec<String>,
    ) -> Result<Self, DtreeError> {
        for attr in &attributes {
            for r in &records {
                if !r.attributes.contains_key(attr) {
                    return Err(DtreeError::MissingAttribute { name: attr.clone() });
                }
            }
        }
        Ok(Self {
            records,
            attributes,
        })
    }

    pub fn records(&self) -> &[CategoricalRecord] {
        &self.records
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }
}

/// Information gain of splitting the view's records on `attribute`:
/// parent entropy minus the size-weighted entropy of the value subsets.
pub fn information_gain<T: Real>(view: &TrainingView, attribute: &str) -> Result<T, DtreeError> {
    if !view.attributes.iter().any(|a| a == attribute) {
        return Err(DtreeError::UnknownAttribute {
            name: attribute.to_string(),
        });
    }
    let idx: Vec<usize> = (0..view.records.len()).collect();
    gain_over(&view.records, &idx, attribute)
}

fn counts_over(records: &[CategoricalRecord], idx: &[usize]) -> ClassCounts {
    ClassCounts::from_classes(idx.iter().map(|&i| &records[i].class_label))
}

fn gain_over<T: Real>(
    records: &[CategoricalRecord],
    idx: &[usize],
    attribute: &str,
) -> Result<T, DtreeError> {
    let parent = entropy::<T>(&counts_over(records, idx))?;
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &i in idx {
        let value = records[i].attributes.get(attribute).ok_or_else(|| {
            DtreeError::MissingAttribute {
                name: attribute.to_string(),
            }
        })?;
        groups.entry(value).or_default().push(i);
    }
    let total = T::from_count(idx.len());
    let mut weighted = T::zero();
    for subset in groups.values() {
        let child = entropy::<T>(&counts_over(records, subset))?;
        weighted = weighted + T::from_count(subset.len()) / total * child;
    }
    Ok(parent - weighted)
}

/// A node of the induced tree: internal nodes test one attribute and hold
/// one branch per attribute value seen in their training subset; leaves
/// carry a class. `fallback_class` is the majority class of the node's
/// training subset and answers values with no branch at classify time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Internal {
        attribute: String,
        #[serde(rename = "fallback")]
        fallback_class: Band,
        branches: BTreeMap<String, TreeNode>,
    },
    Leaf {
        class: Band,
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { branches, .. } => {
                1 + branches.values().map(TreeNode::depth).max().unwrap_or(0)
            }
        }
    }

    fn validate(&self, path: &mut Vec<String>) -> Result<(), DtreeError> {
        match self {
            TreeNode::Leaf { .. } => Ok(()),
            TreeNode::Internal {
                attribute,
                branches,
                ..
            } => {
                if branches.is_empty() {
                    return Err(DtreeError::MalformedTree(format!(
                        "internal node {attribute:?} has no branches"
                    )));
                }
                if path.iter().any(|a| a == attribute) {
                    return Err(DtreeError::MalformedTree(format!(
                        "attribute {attribute:?} repeats on a root-to-leaf path"
                    )));
                }
                path.push(attribute.clone());
                for child in branches.values() {
                    child.validate(path)?;
                }
                path.pop();
                Ok(())
            }
        }
    }
}

// displacement threshold for gain comparisons: an attribute must beat the
// incumbent by more than this, so float noise cannot override the
// attribute-order tie rule
fn tie_epsilon<T: Real>() -> T {
    T::from_f64_const(1e-12)
}

/// True if two records agree on every listed attribute but carry
/// different classes.
fn contradictory(records: &[CategoricalRecord], idx: &[usize], attrs: &[String]) -> bool {
    for (pos, &i) in idx.iter().enumerate() {
        for &j in &idx[pos + 1..] {
            if records[i].class_label != records[j].class_label
                && attrs
                    .iter()
                    .all(|a| records[i].attributes.get(a) == records[j].attributes.get(a))
            {
                return true;
            }
        }
    }
    false
}

/// Induces a decision tree from the view.
pub fn build_tree<T: Real>(view: &TrainingView) -> Result<TreeNode, DtreeError> {
    if view.records.is_empty() {
        return Err(DtreeError::EmptyTrainingSet);
    }
    let idx: Vec<usize> = (0..view.records.len()).collect();
    build_node::<T>(&view.records, &idx, &view.attributes)
}

fn build_node<T: Real>(
    records: &[CategoricalRecord],
    idx: &[usize],
    attrs: &[String],
) -> Result<TreeNode, DtreeError> {
    let counts = counts_over(records, idx);
    let majority = counts.majority().ok_or(DtreeError::EmptyTrainingSet)?;

    let first_class = records[idx[0]].class_label;
    if idx.iter().all(|&i| records[i].class_label == first_class) {
        return Ok(TreeNode::Leaf { class: first_class });
    }
    if attrs.is_empty() {
        return Ok(TreeNode::Leaf { class: majority });
    }

    // argmax gain; ties go to the earliest attribute
    let mut best_attr = &attrs[0];
    let mut best_gain = gain_over::<T>(records, idx, best_attr)?;
    for attr in &attrs[1..] {
        let gain = gain_over::<T>(records, idx, attr)?;
        if gain > best_gain + tie_epsilon::<T>() {
            best_attr = attr;
            best_gain = gain;
        }
    }

    // a zero-gain impure node is a dead end only when the records are
    // actually contradictory; otherwise some attribute still separates
    // them and splitting must continue
    if best_gain <= T::zero() && contradictory(records, idx, attrs) {
        return Ok(TreeNode::Leaf { class: majority });
    }

    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for &i in idx {
        let value = records[i].attributes[best_attr.as_str()].clone();
        groups.entry(value).or_default().push(i);
    }
    let remaining: Vec<String> = attrs.iter().filter(|a| *a != best_attr).cloned().collect();
    let mut branches = BTreeMap::new();
    for (value, subset) in groups {
        branches.insert(value, build_node::<T>(records, &subset, &remaining)?);
    }
    Ok(TreeNode::Internal {
        attribute: best_attr.clone(),
        fallback_class: majority,
        branches,
    })
}

/// Classifies a record by walking the tree. A value with no branch falls
/// back to the node's stored majority class.
pub fn classify(tree: &TreeNode, record: &CategoricalRecord) -> Result<Band, DtreeError> {
    let mut node = tree;
    loop {
        match node {
            TreeNode::Leaf { class } => return Ok(*class),
            TreeNode::Internal {
                attribute,
                fallback_class,
                branches,
            } => {
                let value = record.attributes.get(attribute).ok_or_else(|| {
                    DtreeError::MissingAttribute {
                        name: attribute.clone(),
                    }
                })?;
                match branches.get(value) {
                    Some(child) => node = child,
                    None => return Ok(*fallback_class),
                }
            }
        }
    }
}

/// Renders the tree as deterministic JSON: branch keys sorted by value,
/// leaves as `{"class": ...}`, internal nodes as
/// `{"attribute": ..., "fallback": ..., "branches": {...}}`.
pub fn export_tree(tree: &TreeNode) -> String {
    serde_json::to_string(tree).expect("tree serializes")
}

/// Parses a tree previously rendered by [`export_tree`].
pub fn import_tree(text: &str) -> Result<TreeNode, DtreeError> {
    let tree: TreeNode =
        serde_json::from_str(text).map_err(|e| DtreeError::MalformedTree(e.to_string()))?;
    tree.validate(&mut Vec::new())?;
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::{
        attribute_names, discretize, parse_csv, BandSpec, DiscretizationSpec,
    };

    fn record(pairs: &[(&str, &str)], class: Band) -> CategoricalRecord {
        CategoricalRecord {
            roll: 0,
            attributes: pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            class_label: class,
        }
    }

    fn fixture_view() -> TrainingView {
        let text = std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/table1.csv"),
        )
        .unwrap();
        let ds = parse_csv(&text, "table1").unwrap();
        let cats = discretize(&ds, &DiscretizationSpec::default(), &BandSpec::default());
        TrainingView::new(cats, attribute_names()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy::<f64>(&ClassCounts::new(5, 0, 0)).unwrap(), 0.0);
        assert_eq!(entropy::<f64>(&ClassCounts::new(5, 0, 5)).unwrap(), 1.0);
        // frozen from an independent evaluation of
        // -(0.5 log2 0.5 + 0.45 log2 0.45 + 0.05 log2 0.05)
        let h = entropy::<f64>(&ClassCounts::new(10, 9, 1)).unwrap();
        assert!((h - 1.2344977967946407).abs() < 1e-9, "got {h}");
        assert_eq!(
            entropy::<f64>(&ClassCounts::default()).unwrap_err(),
            DtreeError::AllZeroCounts
        );
    }

    #[test]
    fn gain_is_zero_for_constant_attribute() {
        let records = vec![
            record(&[("a", "x"), ("b", "p")], Band::High),
            record(&[("a", "x"), ("b", "q")], Band::Low),
        ];
        let view = TrainingView::new(records, vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(information_gain::<f64>(&view, "a").unwrap(), 0.0);
    }

    #[test]
    fn gain_of_perfect_separator_equals_parent_entropy() {
        let records = vec![
            record(&[("a", "x")], Band::High),
            record(&[("a", "x")], Band::High),
            record(&[("a", "y")], Band::Low),
        ];
        let view = TrainingView::new(records, vec!["a".into()]).unwrap();
        let counts = ClassCounts::new(2, 0, 1);
        let parent = entropy::<f64>(&counts).unwrap();
        let gain = information_gain::<f64>(&view, "a").unwrap();
        assert!((gain - parent).abs() < 1e-12);
    }

    #[test]
    fn gain_rejects_unknown_attribute() {
        let view = TrainingView::new(vec![record(&[("a", "x")], Band::High)], vec!["a".into()])
            .unwrap();
        assert!(matches!(
            information_gain::<f64>(&view, "nope"),
            Err(DtreeError::UnknownAttribute { .. })
        ));
    }

    #[test]
    fn pure_sample_becomes_leaf() {
        let records = vec![
            record(&[("a", "x")], Band::High),
            record(&[("a", "y")], Band::High),
        ];
        let view = TrainingView::new(records, vec!["a".into()]).unwrap();
        assert_eq!(
            build_tree::<f64>(&view).unwrap(),
            TreeNode::Leaf { class: Band::High }
        );
    }

    #[test]
    fn exhausted_attributes_become_majority_leaf() {
        let records = vec![
            record(&[], Band::Medium),
            record(&[], Band::Medium),
            record(&[], Band::High),
        ];
        let view = TrainingView::new(records, vec![]).unwrap();
        assert_eq!(
            build_tree::<f64>(&view).unwrap(),
            TreeNode::Leaf {
                class: Band::Medium
            }
        );
    }

    #[test]
    fn majority_ties_prefer_high_then_medium() {
        assert_eq!(ClassCounts::new(2, 2, 0).majority(), Some(Band::High));
        assert_eq!(ClassCounts::new(0, 2, 2).majority(), Some(Band::Medium));
        assert_eq!(ClassCounts::new(1, 1, 1).majority(), Some(Band::High));
    }

    #[test]
    fn contradictory_records_collapse_to_majority_leaf() {
        let records = vec![
            record(&[("a", "x")], Band::High),
            record(&[("a", "x")], Band::High),
            record(&[("a", "x")], Band::Low),
        ];
        let view = TrainingView::new(records, vec!["a".into()]).unwrap();
        assert_eq!(
            build_tree::<f64>(&view).unwrap(),
            TreeNode::Leaf { class: Band::High }
        );
    }

    #[test]
    fn zero_gain_but_consistent_records_still_separate() {
        // XOR pattern over two attributes: every single split has zero
        // gain, yet the records are separable
        let records = vec![
            record(&[("a", "0"), ("b", "0")], Band::High),
            record(&[("a", "0"), ("b", "1")], Band::Low),
            record(&[("a", "1"), ("b", "0")], Band::Low),
            record(&[("a", "1"), ("b", "1")], Band::High),
        ];
        let view = TrainingView::new(records.clone(), vec!["a".into(), "b".into()]).unwrap();
        let tree = build_tree::<f64>(&view).unwrap();
        for r in &records {
            assert_eq!(classify(&tree, r).unwrap(), r.class_label);
        }
    }

    #[test]
    fn fixture_root_splits_on_highest_gain_attribute() {
        // gains recomputed by hand for the discretized fixture put
        // attendance_band first (0.3722..., ahead of lab_per at 0.3123...)
        let view = fixture_view();
        let tree = build_tree::<f64>(&view).unwrap();
        match &tree {
            TreeNode::Internal { attribute, .. } => assert_eq!(attribute, "attendance_band"),
            TreeNode::Leaf { .. } => panic!("fixture tree must split at the root"),
        }
        assert!(tree.depth() <= view.attributes().len());
    }

    #[test]
    fn fixture_tree_reproduces_training_labels() {
        let view = fixture_view();
        let tree = build_tree::<f64>(&view).unwrap();
        for r in view.records() {
            assert_eq!(classify(&tree, r).unwrap(), r.class_label, "roll {}", r.roll);
        }
    }

    #[test]
    fn classify_leaf_only_tree_and_fallback() {
        let leaf = TreeNode::Leaf { class: Band::Low };
        let any = record(&[("a", "whatever")], Band::High);
        assert_eq!(classify(&leaf, &any).unwrap(), Band::Low);

        let tree = TreeNode::Internal {
            attribute: "a".into(),
            fallback_class: Band::Medium,
            branches: [(
                "x".to_string(),
                TreeNode::Leaf { class: Band::High },
            )]
            .into_iter()
            .collect(),
        };
        // unseen value "y" falls back to the node's majority class
        let unseen = record(&[("a", "y")], Band::High);
        assert_eq!(classify(&tree, &unseen).unwrap(), Band::Medium);
        // missing attribute errors
        let missing = record(&[("b", "x")], Band::High);
        assert!(matches!(
            classify(&tree, &missing),
            Err(DtreeError::MissingAttribute { .. })
        ));
    }

    #[test]
    fn export_leaf_shape() {
        assert_eq!(
            export_tree(&TreeNode::Leaf { class: Band::High }),
            r#"{"class":"High"}"#
        );
    }

    #[test]
    fn export_single_split_has_sorted_branch_keys() {
        let tree = TreeNode::Internal {
            attribute: "quiz".into(),
            fallback_class: Band::High,
            branches: [
                ("Y".to_string(), TreeNode::Leaf { class: Band::High }),
                ("N".to_string(), TreeNode::Leaf { class: Band::Low }),
            ]
            .into_iter()
            .collect(),
        };
        assert_eq!(
            export_tree(&tree),
            r#"{"attribute":"quiz","fallback":"High","branches":{"N":{"class":"Low"},"Y":{"class":"High"}}}"#
        );
    }

    #[test]
    fn export_import_round_trip_is_byte_identical_on_fixture_tree() {
        let tree = build_tree::<f64>(&fixture_view()).unwrap();
        let exported = export_tree(&tree);
        let imported = import_tree(&exported).unwrap();
        assert_eq!(imported, tree);
        assert_eq!(export_tree(&imported), exported);
    }

    #[test]
    fn import_rejects_malformed_trees() {
        assert!(import_tree("not json").is_err());
        assert!(import_tree(r#"{"attribute":"a","fallback":"High","branches":{}}"#).is_err());
        // repeated attribute on a path
        let repeated = r#"{"attribute":"a","fallback":"High","branches":{"x":{"attribute":"a","fallback":"Low","branches":{"y":{"class":"Low"}}}}}"#;
        assert!(import_tree(repeated).is_err());
    }

    #[test]
    fn build_rejects_empty_training_set() {
        let view = TrainingView::new(vec![], vec!["a".into()]).unwrap();
        assert_eq!(
            build_tree::<f64>(&view).unwrap_err(),
            DtreeError::EmptyTrainingSet
        );
    }
}
