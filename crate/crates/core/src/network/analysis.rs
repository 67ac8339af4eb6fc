//! Checks declared network types against loaded models and rewrites
//! network applications into their canonical tensor form.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{hash_file, load_network, Digest, Network, NetworkError};
use crate::expr::{Expr, VType};
use crate::frontend::{TypedDecl, TypedProgram};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkEntry {
    pub model: Network,
    /// Declared type after synonym expansion.
    pub declared: VType,
    pub path: PathBuf,
    pub digest: Digest,
}

impl NetworkEntry {
    pub fn input_size(&self) -> usize {
        self.model.input_size
    }

    pub fn output_size(&self) -> usize {
        self.model.output_size
    }
}

/// Networks of a specification, keyed by declared name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NetworkContext {
    pub entries: BTreeMap<String, NetworkEntry>,
}

impl NetworkContext {
    pub fn get(&self, name: &str) -> Option<&NetworkEntry> {
        self.entries.get(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("network `{name}` is declared as `{declared}` but its file has type `{actual}`")]
    NetworkTypeMismatch { name: String, declared: String, actual: String },
    #[error("network `{name}` has unsupported type `{ty}`; expected `Tensor A [m] -> Tensor B [n]` or `A -> ... -> A -> B`")]
    UnsupportedNetworkType { name: String, ty: String },
    #[error("no network file given for `{name}`")]
    MissingNetworkFile { name: String },
    #[error("network `{name}` takes {expected} arguments but is applied to {given}")]
    PartialNetworkApplication { name: String, expected: usize, given: usize },
    #[error("a network file was given for `{name}`, which is not declared")]
    UnknownNetworkBinding { name: String },
    #[error("network `{name}` ({path}): {source}")]
    Load { name: String, path: String, source: NetworkError },
}

/// How a declared network type maps onto the model's input/output vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    /// `Tensor A [m] -> Tensor B [n]`, or `-> B` when `scalar_output`.
    Vector { inputs: usize, outputs: usize, scalar_output: bool },
    /// `A -> ... -> A -> B` with `arity` arguments.
    Curried { arity: usize },
}

fn shape_of(name: &str, ty: &VType) -> Result<Shape, AnalysisError> {
    let unsupported = || AnalysisError::UnsupportedNetworkType { name: name.into(), ty: ty.to_string() };
    let VType::Fun(dom, cod) = ty else { return Err(unsupported()) };
    if let VType::Tensor(elem, dims) = &**dom {
        if dims.len() != 1 || elem.num().is_none() {
            return Err(unsupported());
        }
        return match &**cod {
            VType::Tensor(out_elem, out_dims) if out_dims.len() == 1 && out_elem.num().is_some() => {
                Ok(Shape::Vector { inputs: dims[0], outputs: out_dims[0], scalar_output: false })
            }
            VType::Num(_) => Ok(Shape::Vector { inputs: dims[0], outputs: 1, scalar_output: true }),
            _ => Err(unsupported()),
        };
    }
    let first = dom.num().ok_or_else(unsupported)?;
    let mut arity = 1;
    let mut rest = &**cod;
    while let VType::Fun(d, c) = rest {
        if d.num() != Some(first) {
            return Err(unsupported());
        }
        arity += 1;
        rest = c;
    }
    if rest.num().is_none() {
        return Err(unsupported());
    }
    Ok(Shape::Curried { arity })
}

fn check_against_model(name: &str, declared: &VType, shape: Shape, model: &Network) -> Result<(), AnalysisError> {
    let (inputs, outputs) = match shape {
        Shape::Vector { inputs, outputs, .. } => (inputs, outputs),
        Shape::Curried { arity } => (arity, 1),
    };
    if inputs != model.input_size || outputs != model.output_size {
        return Err(AnalysisError::NetworkTypeMismatch {
            name: name.into(),
            declared: declared.to_string(),
            actual: format!("Tensor Rat [{}] -> Tensor Rat [{}]", model.input_size, model.output_size),
        });
    }
    Ok(())
}

fn rewrite(e: &Expr, shapes: &BTreeMap<String, Shape>) -> Result<Expr, AnalysisError> {
    // an application spine headed by a network
    let mut args = Vec::new();
    let mut head = e;
    while let Expr::App(f, a) = head {
        args.push(&**a);
        head = f;
    }
    if let Expr::Network(name) = head {
        args.reverse();
        let args = args.into_iter().map(|a| rewrite(a, shapes)).collect::<Result<Vec<_>, _>>()?;
        let shape = shapes[name];
        return match shape {
            Shape::Vector { scalar_output, .. } => {
                if args.len() != 1 {
                    return Err(AnalysisError::PartialNetworkApplication {
                        name: name.clone(),
                        expected: 1,
                        given: args.len(),
                    });
                }
                let app = Expr::NetworkApp(name.clone(), Box::new(args.into_iter().next().unwrap()));
                Ok(if scalar_output { Expr::index(app, 0) } else { app })
            }
            Shape::Curried { arity } => {
                if args.len() != arity {
                    return Err(AnalysisError::PartialNetworkApplication {
                        name: name.clone(),
                        expected: arity,
                        given: args.len(),
                    });
                }
                Ok(Expr::index(Expr::NetworkApp(name.clone(), Box::new(Expr::Tensor(args))), 0))
            }
        };
    }
    Ok(match e {
        Expr::Var(_) | Expr::Free(_) | Expr::Solver(_) | Expr::Lit(_) | Expr::Network(_) => e.clone(),
        Expr::Tensor(items) => Expr::Tensor(items.iter().map(|x| rewrite(x, shapes)).collect::<Result<_, _>>()?),
        Expr::Builtin(op, items) => {
            Expr::Builtin(*op, items.iter().map(|x| rewrite(x, shapes)).collect::<Result<_, _>>()?)
        }
        Expr::App(f, a) => Expr::app(rewrite(f, shapes)?, rewrite(a, shapes)?),
        Expr::Lam(b, body) => Expr::Lam(b.clone(), Box::new(rewrite(body, shapes)?)),
        Expr::Quant(q, b, body) => Expr::quant(*q, b.clone(), rewrite(body, shapes)?),
        Expr::Let(n, a, b) => Expr::Let(n.clone(), Box::new(rewrite(a, shapes)?), Box::new(rewrite(b, shapes)?)),
        Expr::NetworkApp(n, a) => Expr::NetworkApp(n.clone(), Box::new(rewrite(a, shapes)?)),
        Expr::Index(a, b) => Expr::Index(Box::new(rewrite(a, shapes)?), Box::new(rewrite(b, shapes)?)),
    })
}

/// Network analysis over already loaded models.
pub fn analyze_with_models(
    program: &TypedProgram,
    mut models: BTreeMap<String, (Network, PathBuf, Digest)>,
) -> Result<(TypedProgram, NetworkContext), AnalysisError> {
    let mut ctx = NetworkContext::default();
    let mut shapes = BTreeMap::new();
    for (name, declared) in program.networks() {
        let shape = shape_of(name, declared)?;
        let (model, path, digest) = models
            .remove(name)
            .ok_or_else(|| AnalysisError::MissingNetworkFile { name: name.into() })?;
        check_against_model(name, declared, shape, &model)?;
        shapes.insert(name.to_string(), shape);
        ctx.entries.insert(
            name.to_string(),
            NetworkEntry { model, declared: declared.clone(), path, digest },
        );
    }
    if let Some(name) = models.keys().next() {
        return Err(AnalysisError::UnknownNetworkBinding { name: name.clone() });
    }
    let mut decls = Vec::new();
    for decl in &program.decls {
        match decl {
            TypedDecl::Network { .. } => {}
            TypedDecl::Def { name, surface, ty, params, body, span } => decls.push(TypedDecl::Def {
                name: name.clone(),
                surface: surface.clone(),
                ty: ty.clone(),
                params: params.clone(),
                body: rewrite(body, &shapes)?,
                span: *span,
            }),
            other => decls.push(other.clone()),
        }
    }
    Ok((TypedProgram { decls }, ctx))
}

/// Loads and hashes each bound network file, then runs the analysis.
pub fn analyze_network_types(
    program: &TypedProgram,
    files: &BTreeMap<String, PathBuf>,
) -> Result<(TypedProgram, NetworkContext), AnalysisError> {
    let mut models = BTreeMap::new();
    let declared: Vec<&str> = program.networks().map(|(n, _)| n).collect();
    for (name, path) in files {
        if !declared.contains(&name.as_str()) {
            return Err(AnalysisError::UnknownNetworkBinding { name: name.clone() });
        }
        let load_err = |source| AnalysisError::Load {
            name: name.clone(),
            path: path.display().to_string(),
            source,
        };
        let model = load_network(path).map_err(load_err)?;
        let digest = hash_file(path).map_err(|e| {
            load_err(NetworkError::Io { path: path.display().to_string(), message: e.to_string() })
        })?;
        let path = canonical(path);
        models.insert(name.clone(), (model, path, digest));
    }
    analyze_with_models(program, models)
}

fn canonical(path: &Path) -> PathBuf {
    std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}
