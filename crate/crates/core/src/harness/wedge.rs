//! The `wedge` subcommand: build the wedge of a chart-coordinate arc and
//! report its specialization, witness and image on the surface.

use serde::Serialize;

use super::definition::{DefinitionError, SurfaceDefinition};
use crate::arc::{
    contact_order, generic_fiber_witness, push_forward, specialize_at_zero, wedge_from_arc, Arc,
    ArcError, ContactOrder, FiberWitness, Wedge,
};
use crate::ring::CoefficientRing;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WedgeReport {
    pub field: String,
    pub frame: String,
    pub arc: String,
    pub wedge: String,
    pub specialization: String,
    pub round_trip: bool,
    pub witness: FiberWitness,
    /// The wedge pushed to the surface through the frame's chart.
    pub image: Option<String>,
    /// Contact order of each relation with the image arc at `u = 0`.
    pub image_contact: Option<Vec<ContactOrder>>,
}

/// Field the arcs of a definition live over: the ring itself if it is a
/// field, `F_p` for `Z_(p)` (special fiber), `Q` for `Z`.
pub fn arc_field(ring: CoefficientRing) -> CoefficientRing {
    match ring {
        CoefficientRing::LocalizedIntegers(p) => CoefficientRing::PrimeField(p),
        CoefficientRing::Integers => CoefficientRing::Rationals,
        r => r,
    }
}

/// Splits `"(0, t^2, t^3)"` into its component expressions.
pub fn split_series_list(src: &str) -> Vec<String> {
    let s = src.trim();
    let s = s
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .unwrap_or(s);
    s.split(',').map(|p| p.trim().to_string()).collect()
}

pub fn wedge_report(
    def: &SurfaceDefinition,
    arc_src: &str,
    frame_name: &str,
    precision: usize,
) -> Result<WedgeReport, DefinitionError> {
    let frame = def.frame(frame_name)?;
    let field = arc_field(def.ring);
    let arc = Arc::parse(field, precision, &split_series_list(arc_src))?;
    let wedge = wedge_from_arc(&arc, &frame)?;
    let back = specialize_at_zero(&wedge);
    let (image, image_contact) = match frame.chart() {
        None => (None, None),
        Some(_) => {
            let img = push_forward(&wedge, &frame)?;
            let img = Wedge::new(field, img)?;
            let at_zero = specialize_at_zero(&img);
            let tri = def.triple()?;
            let contact = tri
                .relations()
                .iter()
                .map(|f| contact_order(&at_zero, f))
                .collect::<Result<Vec<_>, ArcError>>()?;
            (Some(img.to_string()), Some(contact))
        }
    };
    Ok(WedgeReport {
        field: field.to_string(),
        frame: frame.name().to_string(),
        arc: arc.to_string(),
        wedge: wedge.to_string(),
        specialization: back.to_string(),
        round_trip: back == arc,
        witness: generic_fiber_witness(&wedge),
        image,
        image_contact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::definition::Format;

    const DEF: &str = r#"
name = "A1"
ring = "Q"
variables = ["Y1", "Y2", "Y3"]
relations = ["Y1*Y2 - Y3^2"]

[[frames]]
name = "chart"
case = "two_components"
coordinates = ["u", "x1", "x2"]
chart = ["x1", "x1*x2^2", "x1*x2"]
"#;

    #[test]
    fn report() {
        let d = SurfaceDefinition::parse(DEF, Format::Toml).unwrap();
        let r = wedge_report(&d, "(0, t^2, t^3)", "chart", 6).unwrap();
        assert_eq!(r.wedge, "(u*t, t^2, t^3)");
        assert_eq!(r.specialization, "(0, t^2, t^3)");
        assert!(r.round_trip && r.witness.holds);
        assert_eq!(r.image.as_deref(), Some("(t^2, 0, t^5)"));
        assert_eq!(r.image_contact, Some(vec![ContactOrder::AtLeast(7)]));
        assert!(wedge_report(&d, "t, t, t", "chart", 4).is_err());
        assert!(wedge_report(&d, "0, t, t", "nope", 4).is_err());
    }

    #[test]
    fn splitting() {
        assert_eq!(split_series_list("(0, t^2, t^3)"), vec!["0", "t^2", "t^3"]);
        assert_eq!(split_series_list("0,t"), vec!["0", "t"]);
    }
}
