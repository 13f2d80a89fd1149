//! Graph hypersurfaces `t = u(x)` over triangulated base polygons in 3-dimensional charts.

mod gauss_bonnet;
mod graph;
mod height;
mod integrals;
mod local;
mod mesh;

pub use gauss_bonnet::{chord_length, discrete_gauss_bonnet, triangle_angles, GaussBonnetReport};
pub use graph::{
    angle_between_normals, unit_normal_of_covector, Coorientation, GraphSurface, SurfaceFile, SurfacePoint,
};
pub use height::{HeightJet, HeightProfile, LocalHeight};
pub use integrals::{
    column_integral, metric_with_t_derivative, subgraph_measure, subgraph_volume, surface_area, surface_integral,
    triangle_area_grad, triangle_column_grad, triangle_geoms, vertex_areas, volume_density, wall_term_grad,
    TriangleGeom, GAUSS3, GAUSS4,
};
pub use local::{
    gauss_terms, graph_embedding, graph_geometry, graph_induced, induced_from, intrinsic_gauss_curvature,
    local_geometry, unit_normal, GaussTerms, LocalGeometry,
};
pub use mesh::{BaseMesh, BoundaryEdge, SideShape};

use crate::curvature::DerivMode;
use crate::error::Result;
use crate::metric::MetricField;

/// Traced Gauss-equation residual of `Y` at a point.
pub fn gauss_equation_residual(g: &MetricField, y: &GraphSurface, at: SurfacePoint, mode: DerivMode) -> Result<f64> {
    let model = y.local_height(at)?;
    Ok(gauss_terms(g, &model, y.base_point(at), y.coorientation.sign(), mode)?.residual)
}
