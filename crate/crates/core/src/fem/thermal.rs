//! Axisymmetric steady heat conduction with Robin exchange.

use super::data::{ScalarData, Site, ThermalData};
use super::element::{physical_gradients, ElementGeometry};
use super::space::FunctionSpace;
use super::system::{Assembler, LinearSystem};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryTag, Mesh};
use crate::linalg::TripletBuilder;

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidData(format!("{name} = {v} must be positive")))
    }
}

/// `∫ k ∇T·∇ψ r` plus `∫ h T ψ r` on the Robin faces; rhs collects source, Robin and top-flux data.
pub fn assemble_thermal(mesh: &Mesh, data: &ThermalData) -> Result<LinearSystem> {
    let asm = Assembler::new(mesh, 1);
    let k = asm.refe.n_local();
    let refe = &asm.refe;
    let conduction = asm.matrix(|e, m| {
        let geo = ElementGeometry::of(mesh, e);
        let mut grads = Vec::with_capacity(k);
        for (q, eval) in refe.basis.iter().enumerate() {
            let x = geo.point(refe.rule.points[q]);
            let kappa = positive("conductivity", data.conductivity.eval(&Site::interior(x)))?;
            let w = refe.rule.weights[q] * geo.det * x.r * kappa;
            physical_gradients(&geo, eval, &mut grads);
            for i in 0..k {
                for j in i..k {
                    let v = w * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                    m[i * k + j] += v;
                }
            }
        }
        mirror(m, k);
        Ok(())
    })?;
    let source = if data.source.is_zero() {
        vec![0.0; mesh.n_nodes()]
    } else {
        asm.vector(|e, v| {
            let geo = ElementGeometry::of(mesh, e);
            for (q, eval) in refe.basis.iter().enumerate() {
                let x = geo.point(refe.rule.points[q]);
                let w = refe.rule.weights[q] * geo.det * x.r * data.source.eval(&Site::interior(x));
                for i in 0..k {
                    v[i] += w * eval.values[i];
                }
            }
            Ok(())
        })?
    };

    let n = mesh.n_nodes();
    let mut robin = TripletBuilder::new(n, n);
    let mut rhs = source;
    for edge in &mesh.boundary {
        let geo = ElementGeometry::of(mesh, edge.element);
        let nodes = mesh.element_nodes(edge.element);
        let (len, normal) = geo.edge(edge.local_edge);
        let table = &refe.edge_basis[edge.local_edge];
        let coeffs: Option<(&ScalarData, &ScalarData)> = data.robin(edge.tag);
        let mut local = vec![0.0; k * k];
        for (q, &s) in refe.edge_points.iter().enumerate() {
            let site = Site { point: geo.edge_point(edge.local_edge, s), normal: Some(normal) };
            let w = refe.edge_weights[q] * len * site.point.r;
            let phi = &table[q];
            let load = match (edge.tag, coeffs) {
                (_, Some((h, t_ext))) => {
                    let h = positive("heat transfer coefficient", h.eval(&site))?;
                    for i in 0..k {
                        for j in i..k {
                            local[i * k + j] += w * h * phi[i] * phi[j];
                        }
                    }
                    h * t_ext.eval(&site)
                }
                (BoundaryTag::Top, None) => -data.q_top.eval(&site),
                _ => 0.0,
            };
            for i in 0..k {
                rhs[nodes[i]] += w * load * phi[i];
            }
        }
        if coeffs.is_some() {
            mirror(&mut local, k);
            for i in 0..k {
                for j in 0..k {
                    if local[i * k + j] != 0.0 {
                        robin.push(nodes[i], nodes[j], local[i * k + j]);
                    }
                }
            }
        }
    }
    let matrix = conduction.add_scaled(1.0, &robin.build());
    Ok(LinearSystem { matrix, rhs, space: FunctionSpace::scalar(mesh) })
}

/// Copies the upper triangle of a row-major `k x k` block into the lower one.
pub(crate) fn mirror(m: &mut [f64], k: usize) {
    for i in 0..k {
        for j in 0..i {
            m[i * k + j] = m[j * k + i];
        }
    }
}
