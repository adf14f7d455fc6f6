//! Triangulation-based medial-axis graph of the free space.

mod graph;
mod mesh;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use graph::{
    polyline_length, Chain, ChainId, DumpNode, GraphDump, MedialAxisGraph, Node, NodeId, NodeKind,
    Removal, Route, RouteChain,
};
pub use mesh::{circumcenter, triangulate, triangulation_count, TriangulationMesh};

#[derive(Debug, Error)]
pub enum MedialAxisError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("triangle is not on the current route")]
    NotOnRoute,
    #[error("unknown or purged node")]
    UnknownNode,
    #[error("no route between the requested nodes")]
    NoRoute,
    #[error("no triangle path to the requested node")]
    Unreachable,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
