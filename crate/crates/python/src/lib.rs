//! Python bindings for `cegd`.
//!
//! ```python
//! import cegd_py
//! model = cegd_py.Model.load("paper_example.ceg")
//! graph = model.ceg()
//! value, decisions = graph.solve()
//! ```

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cegd::ci::{self, Cut};
use cegd::model_io::parse_model_bytes;
use cegd::oracle::{enumerate_strategies, rollback};
use cegd::transform::{manipulate, parsimonize, Manipulation};
use cegd::{
    build_ceg, export_dot, solve, validate_tree, Ceg, EventTree, Flavour, Levels, PositionKind,
    SolveReport, StageId,
};

create_exception!(cegd_py, CegdError, PyValueError, "Raised when a model or an operation fails.");

fn fail(e: impl std::fmt::Display) -> PyErr {
    CegdError::new_err(e.to_string())
}

fn flavour(name: Option<&str>, tree: &EventTree) -> PyResult<Flavour> {
    match name {
        None => Ok(tree.flavour()),
        Some("type1") => Ok(Flavour::Type1),
        Some("type2") => Ok(Flavour::Type2),
        Some(other) => Err(fail(format!("unknown flavour `{other}`, expected type1 or type2"))),
    }
}

/// A validated event tree read from the text model format.
#[pyclass(module = "cegd_py", frozen)]
struct Model {
    tree: EventTree,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Self::from_bytes(text.as_bytes())
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let bytes = std::fs::read(&path)
            .map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.tree.nodes().len()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.tree.edges().len()
    }

    #[getter]
    fn stage_count(&self) -> usize {
        self.tree.stages().len()
    }

    /// `(depth, variable)` pairs declared by the model.
    fn levels(&self) -> Vec<(usize, String)> {
        self.tree.levels().iter().map(|(d, v)| (d, v.to_string())).collect()
    }

    /// Maximum expected utility by backward induction on the tree.
    fn rollback(&self) -> f64 {
        rollback(&self.tree)
    }

    /// Every pure strategy as `(expected_utility, {decision node: label})`.
    fn strategies(&self) -> PyResult<Vec<(f64, BTreeMap<String, String>)>> {
        let all = enumerate_strategies(&self.tree).map_err(fail)?;
        Ok(all
            .into_iter()
            .map(|s| {
                let choices = s
                    .choices
                    .iter()
                    .map(|(&n, &e)| (self.tree.node(n).name.clone(), self.tree.edge(e).label.clone()))
                    .collect();
                (s.expected_utility, choices)
            })
            .collect())
    }

    fn to_dot(&self) -> String {
        export_dot(&self.tree)
    }

    #[pyo3(signature = (flavour=None))]
    fn ceg(&self, flavour: Option<&str>) -> PyResult<Graph> {
        let f = self::flavour(flavour, &self.tree)?;
        let ceg = build_ceg(&self.tree, f).map_err(fail)?;
        Ok(Graph { ceg, levels: self.tree.levels().clone() })
    }
}

impl Model {
    fn from_bytes(bytes: &[u8]) -> PyResult<Self> {
        let doc = parse_model_bytes(bytes).map_err(fail)?;
        let tree = validate_tree(&doc).map_err(fail)?;
        Ok(Model { tree })
    }
}

/// A chain event graph together with the variable names of its model.
#[pyclass(name = "Ceg", module = "cegd_py", frozen)]
struct Graph {
    ceg: Ceg,
    levels: Levels,
}

impl Graph {
    fn derive(&self, ceg: Ceg) -> Graph {
        Graph { ceg, levels: self.levels.clone() }
    }

    fn position(&self, name: &str) -> PyResult<cegd::PositionId> {
        self.ceg
            .find(name)
            .ok_or_else(|| fail(ci::CiError::UnknownPosition(name.to_string())))
    }
}

#[pymethods]
impl Graph {
    #[getter]
    fn flavour(&self) -> String {
        self.ceg.flavour().to_string()
    }

    #[getter]
    fn root(&self) -> String {
        self.ceg.position(self.ceg.root()).name.clone()
    }

    /// `(name, kind, stage)` per position; kind is `chance`, `decision`,
    /// `sink` or the utility value of a terminal.
    fn positions(&self, py: Python<'_>) -> PyResult<Vec<(String, Py<PyAny>, Option<String>)>> {
        self.ceg
            .positions()
            .iter()
            .map(|p| {
                let kind = match p.kind {
                    PositionKind::Chance => "chance".into_pyobject(py)?.into_any().unbind(),
                    PositionKind::Decision => "decision".into_pyobject(py)?.into_any().unbind(),
                    PositionKind::Sink => "sink".into_pyobject(py)?.into_any().unbind(),
                    PositionKind::Utility(u) => u.into_pyobject(py)?.into_any().unbind(),
                };
                Ok((p.name.clone(), kind, p.stage.map(|s| s.to_string())))
            })
            .collect()
    }

    /// `(source, target, label, prob, utility)` per edge.
    fn edges(&self) -> Vec<(String, String, String, Option<f64>, Option<f64>)> {
        self.ceg
            .edges()
            .iter()
            .map(|e| {
                (
                    self.ceg.position(e.source).name.clone(),
                    self.ceg.position(e.target).name.clone(),
                    e.label.clone(),
                    e.prob,
                    e.utility,
                )
            })
            .collect()
    }

    /// Returns `(value, [(decision position, label), ...])`.
    fn solve(&self) -> PyResult<(f64, Vec<(String, String)>)> {
        let (state, strategy) = solve(&self.ceg).map_err(fail)?;
        let report = SolveReport::new(&self.ceg, &state, &strategy);
        Ok((report.value, report.decisions))
    }

    /// The solution in the same text form the command line prints.
    fn report(&self) -> PyResult<String> {
        let (state, strategy) = solve(&self.ceg).map_err(fail)?;
        Ok(SolveReport::new(&self.ceg, &state, &strategy).to_string())
    }

    fn parsimonize(&self) -> PyResult<Graph> {
        Ok(self.derive(parsimonize(&self.ceg).map_err(fail)?))
    }

    fn manipulate(&self, at: &str, choose: &str) -> PyResult<Graph> {
        let m = Manipulation::by_name(&self.ceg, at, choose).map_err(fail)?;
        Ok(self.derive(manipulate(&self.ceg, &m).map_err(fail)?))
    }

    fn to_dot(&self) -> String {
        export_dot(&self.ceg)
    }

    fn ci_position(&self, name: &str) -> PyResult<String> {
        let w = self.position(name)?;
        let s = ci::statement_from_position(&self.ceg, w, &self.levels).map_err(fail)?;
        Ok(s.to_string())
    }

    fn ci_stage(&self, stage: &str) -> PyResult<String> {
        let id: StageId = stage
            .parse()
            .map_err(|_| fail(ci::CiError::UnknownStage(stage.to_string())))?;
        let s = ci::statement_from_stage(&self.ceg, id, &self.levels).map_err(fail)?;
        Ok(s.to_string())
    }

    fn is_cut(&self, items: Vec<String>) -> PyResult<bool> {
        let cut = Cut::by_names(&self.ceg, &items).map_err(fail)?;
        ci::verify_cut(&self.ceg, &cut).map_err(fail)
    }

    fn ci_cut(&self, items: Vec<String>) -> PyResult<String> {
        let cut = Cut::by_names(&self.ceg, &items).map_err(fail)?;
        let s = ci::statement_from_cut(&self.ceg, &cut, &self.levels).map_err(fail)?;
        Ok(s.to_string())
    }

    /// Upstream variables that do not affect the optimal choice of `variable`.
    fn irrelevant_for(&self, variable: &str) -> PyResult<Vec<String>> {
        ci::irrelevant_for_decision(&self.ceg, variable, &self.levels).map_err(fail)
    }

    fn __len__(&self) -> usize {
        self.ceg.positions().len()
    }

    fn __str__(&self) -> String {
        self.ceg.to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "<Ceg {} root={} positions={} edges={}>",
            self.ceg.flavour(),
            self.root(),
            self.ceg.positions().len(),
            self.ceg.edges().len()
        )
    }
}

#[pymodule]
fn cegd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CegdError", m.py().get_type::<CegdError>())?;
    m.add_class::<Model>()?;
    m.add_class::<Graph>()?;
    Ok(())
}
