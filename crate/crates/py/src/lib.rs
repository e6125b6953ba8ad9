//! Python bindings. Games are passed as `.wg` / `.wtg` text; results come back
//! as plain dicts, lists, ints and strings (`"-inf"`, `"+inf"`, rationals as `"p/q"`).

use divgame::corner::is_divergent_timed;
use divgame::graph_analysis::is_divergent_untimed;
use divgame::pwa::fmt_ext;
use divgame::timed::{parse_q, TimedGame};
use divgame::timed_solver::{solve_timed, solve_timed_grid, TimedSolveError};
use divgame::untimed::{self, SolveError};
use divgame::WeightedGame;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

create_exception!(divgame_py, NotDivergentError, PyValueError, "The game is not divergent.");

fn untimed_game(text: &str) -> PyResult<WeightedGame> {
    WeightedGame::parse(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn timed_game(text: &str) -> PyResult<TimedGame> {
    TimedGame::parse(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn solve_err(e: SolveError) -> PyErr {
    match e {
        SolveError::NotDivergent(_) => NotDivergentError::new_err(e.to_string()),
        SolveError::GuardViolated { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn timed_err(e: TimedSolveError) -> PyErr {
    match e {
        TimedSolveError::NotDivergent(_) => NotDivergentError::new_err(e.to_string()),
        TimedSolveError::Untimed(inner) => solve_err(inner),
        TimedSolveError::Inconsistent { .. } | TimedSolveError::Degenerate(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Converts JSON into the matching Python object.
pub fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(to_py(py, x)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, x) in map {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

/// Whether an untimed (`game untimed`) or timed (`game timed`) game is divergent.
#[pyfunction]
fn is_divergent(text: &str) -> PyResult<bool> {
    let header = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty());
    if header.is_some_and(|h| h.split_whitespace().eq(["game", "timed"])) {
        Ok(is_divergent_timed(&timed_game(text)?).divergent)
    } else {
        Ok(is_divergent_untimed(&untimed_game(text)?).divergent)
    }
}

/// Optimal values of a divergent untimed game, keyed by vertex name.
#[pyfunction]
fn solve(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    let g = untimed_game(text)?;
    let v = untimed::solve(&g).map_err(solve_err)?;
    to_py(py, &v.to_json(&g))
}

/// Values by exhaustive search (small games only).
#[pyfunction]
fn brute_force(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    let g = untimed_game(text)?;
    let v = untimed::brute_force_values(&g).map_err(solve_err)?;
    to_py(py, &v.to_json(&g))
}

/// Piecewise-affine values of a divergent one-clock timed game.
#[pyfunction]
fn solve_timed_game(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    let g = timed_game(text)?;
    let v = solve_timed(&g).map_err(timed_err)?;
    to_py(py, &v.to_json(&g))
}

/// Exact value at `(state, x)` of a one-clock game, as `"p/q"`, `"-inf"` or `"+inf"`.
#[pyfunction]
fn timed_value(text: &str, state: &str, x: &str) -> PyResult<String> {
    let g = timed_game(text)?;
    let s = g.state_id(state).ok_or_else(|| PyValueError::new_err(format!("unknown state {state}")))?;
    let x = parse_q(x).ok_or_else(|| PyValueError::new_err(format!("bad rational {x:?}")))?;
    let v = solve_timed(&g).map_err(timed_err)?;
    let value = v.eval(s, &x).ok_or_else(|| PyValueError::new_err("valuation outside the clock bound"))?;
    Ok(fmt_ext(&value))
}

/// Values on the grid with step `1/granularity`.
#[pyfunction]
fn solve_grid(py: Python<'_>, text: &str, granularity: u32) -> PyResult<Py<PyAny>> {
    let g = timed_game(text)?;
    let v = solve_timed_grid(&g, granularity).map_err(timed_err)?;
    to_py(py, &v.to_json(&g))
}

#[pymodule]
pub fn divgame_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NotDivergentError", m.py().get_type::<NotDivergentError>())?;
    m.add_function(wrap_pyfunction!(is_divergent, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(solve_timed_game, m)?)?;
    m.add_function(wrap_pyfunction!(timed_value, m)?)?;
    m.add_function(wrap_pyfunction!(solve_grid, m)?)?;
    Ok(())
}
