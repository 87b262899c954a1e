//! Indoor line-of-sight optical MIMO channel.
//!
//! Ceiling-mounted LEDs radiate as generalized Lambertian sources and
//! table-top photodetectors collect the line-of-sight component. The DC gain
//! between LED `j` and detector `i` is
//!
//! ```text
//! h_ij = (n + 1) / (2 pi) * cos^n(phi_ij) * cos(theta_ij) * A / R_ij^2
//! ```
//!
//! when the incidence angle `theta_ij` lies within the detector field of
//! view, and zero otherwise. `phi_ij` is the angle of irradiance measured
//! from the LED boresight, `theta_ij` the angle of incidence measured from
//! the detector normal, `A` the active detector area and `R_ij` the
//! LED-detector distance. The Lambertian mode number follows from the
//! half-power semiangle as `n = -ln 2 / ln cos(Phi_half)`.
//!
//! Coordinates: the room is an axis-aligned box with one floor corner at the
//! origin and `z` pointing up. LEDs sit on a horizontal ceiling plane facing
//! straight down, detectors on a table plane facing straight up, and both
//! arrays are centred on the room's vertical axis.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("half-power semiangle must lie strictly between 0 and 90 degrees, got {0}")]
    InvalidSemiangle(f64),
    #[error("field of view must lie in (0, 90] degrees, got {0}")]
    InvalidFov(f64),
    #[error("{what} must be positive and finite, got {value}")]
    InvalidParameter { what: &'static str, value: f64 },
    #[error("orientation must be a finite non-zero vector")]
    InvalidOrientation,
    #[error("{what} position ({x}, {y}, {z}) lies outside the room")]
    OutsideRoom { what: &'static str, x: f64, y: f64, z: f64 },
    #[error("LED and detector positions must be distinct")]
    CoincidentNodes,
    #[error("LED count must be 2 or 4, got {0}")]
    BadLedCount(usize),
    #[error("detector count must be 2 or 4, got {0}")]
    BadPdCount(usize),
    #[error("SNR must not be NaN")]
    InvalidSnr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn sub(self, other: Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    fn scaled(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Lambertian mode number for a half-power semiangle in degrees.
///
/// Requires `0 < phi_half_deg < 90`. A 60 degree semiangle gives `n = 1`
/// (the classic cosine emitter).
pub fn mode_number(phi_half_deg: f64) -> Result<f64, ChannelError> {
    if !(phi_half_deg > 0.0 && phi_half_deg < 90.0) {
        return Err(ChannelError::InvalidSemiangle(phi_half_deg));
    }
    Ok(-std::f64::consts::LN_2 / phi_half_deg.to_radians().cos().ln())
}

#[derive(Debug, Clone)]
pub struct LedSpec {
    pub position: Vec3,
    /// Unit boresight direction (normalized by the constructor).
    pub orientation: Vec3,
    pub half_power_semiangle_deg: f64,
    pub mode_number: f64,
}

impl LedSpec {
    pub fn new(position: Vec3, orientation: Vec3, phi_half_deg: f64) -> Result<Self, ChannelError> {
        let n = mode_number(phi_half_deg)?;
        let len = orientation.norm();
        if !orientation.is_finite() || len == 0.0 {
            return Err(ChannelError::InvalidOrientation);
        }
        Ok(Self {
            position,
            orientation: orientation.scaled(1.0 / len),
            half_power_semiangle_deg: phi_half_deg,
            mode_number: n,
        })
    }

    /// Ceiling LED pointing straight down.
    pub fn downward(position: Vec3, phi_half_deg: f64) -> Result<Self, ChannelError> {
        Self::new(position, Vec3::new(0.0, 0.0, -1.0), phi_half_deg)
    }
}

#[derive(Debug, Clone)]
pub struct PdSpec {
    pub position: Vec3,
    /// Unit normal of the detector surface (normalized by the constructor).
    pub orientation: Vec3,
    pub area_m2: f64,
    pub fov_deg: f64,
}

impl PdSpec {
    pub fn new(
        position: Vec3,
        orientation: Vec3,
        area_m2: f64,
        fov_deg: f64,
    ) -> Result<Self, ChannelError> {
        if !(fov_deg > 0.0 && fov_deg <= 90.0) {
            return Err(ChannelError::InvalidFov(fov_deg));
        }
        if !(area_m2 > 0.0 && area_m2.is_finite()) {
            return Err(ChannelError::InvalidParameter {
                what: "detector area",
                value: area_m2,
            });
        }
        let len = orientation.norm();
        if !orientation.is_finite() || len == 0.0 {
            return Err(ChannelError::InvalidOrientation);
        }
        Ok(Self {
            position,
            orientation: orientation.scaled(1.0 / len),
            area_m2,
            fov_deg,
        })
    }

    /// Table-top detector facing straight up.
    pub fn upward(position: Vec3, area_m2: f64, fov_deg: f64) -> Result<Self, ChannelError> {
        Self::new(position, Vec3::new(0.0, 0.0, 1.0), area_m2, fov_deg)
    }
}

/// DC gain of a single LED-detector link.
///
/// Returns zero when the detector sits behind the LED lobe (`cos phi <= 0`)
/// or outside the field of view. The field-of-view edge itself is included:
/// `theta == fov` still collects light. The comparison happens in the cosine
/// domain with a tiny slack so that geometrically exact edge placements are
/// not lost to rounding.
///
/// Panics in debug builds if the two nodes coincide.
pub fn channel_gain(led: &LedSpec, pd: &PdSpec) -> f64 {
    let link = pd.position.sub(led.position);
    let dist_sq = link.dot(link);
    debug_assert!(dist_sq > 0.0, "LED and detector positions must differ");
    let dir = link.scaled(1.0 / dist_sq.sqrt());
    let cos_phi = led.orientation.dot(dir);
    if cos_phi <= 0.0 {
        return 0.0;
    }
    let cos_theta = -pd.orientation.dot(dir);
    if cos_theta < pd.fov_deg.to_radians().cos() - 1e-12 {
        return 0.0;
    }
    let n = led.mode_number;
    (n + 1.0) / (2.0 * std::f64::consts::PI) * cos_phi.powf(n) * cos_theta * pd.area_m2 / dist_sq
}

/// A concrete placement of LEDs and photodetectors inside a room.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub room: Vec3,
    pub leds: Vec<LedSpec>,
    pub pds: Vec<PdSpec>,
    /// Detector responsivity in A/W, common to all detectors.
    pub responsivity: f64,
}

impl Geometry {
    pub fn new(
        room: Vec3,
        leds: Vec<LedSpec>,
        pds: Vec<PdSpec>,
        responsivity: f64,
    ) -> Result<Self, ChannelError> {
        if !(responsivity > 0.0 && responsivity.is_finite()) {
            return Err(ChannelError::InvalidParameter {
                what: "responsivity",
                value: responsivity,
            });
        }
        let inside = |p: Vec3| {
            (0.0..=room.x).contains(&p.x)
                && (0.0..=room.y).contains(&p.y)
                && (0.0..=room.z).contains(&p.z)
        };
        for led in &leds {
            if !inside(led.position) {
                let p = led.position;
                return Err(ChannelError::OutsideRoom { what: "LED", x: p.x, y: p.y, z: p.z });
            }
        }
        for pd in &pds {
            if !inside(pd.position) {
                let p = pd.position;
                return Err(ChannelError::OutsideRoom { what: "detector", x: p.x, y: p.y, z: p.z });
            }
        }
        for led in &leds {
            for pd in &pds {
                if led.position == pd.position {
                    return Err(ChannelError::CoincidentNodes);
                }
            }
        }
        Ok(Self { room, leds, pds, responsivity })
    }

    pub fn n_leds(&self) -> usize {
        self.leds.len()
    }

    pub fn n_pds(&self) -> usize {
        self.pds.len()
    }
}

/// Parameters of the standard centred deployment.
///
/// Defaults reproduce the reference indoor setup: a 5 m x 5 m x 3.5 m room,
/// 60 degree half-power LEDs at 3 m height spaced 1 m apart, and 1 cm^2
/// detectors with an 85 degree field of view at 0.8 m height spaced 0.1 m
/// apart, with unit responsivity.
///
/// Both arrays are centred on the room axis. Two elements sit on the x axis
/// at `+-d/2`; four elements form a square grid in row-major order
/// (-,-), (+,-), (-,+), (+,+) with offsets of `+-d/2` per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryParams {
    pub room: Vec3,
    pub tx_height: f64,
    pub phi_half_deg: f64,
    pub n_leds: usize,
    pub d_tx: f64,
    pub rx_height: f64,
    pub fov_deg: f64,
    pub area_m2: f64,
    pub n_pds: usize,
    pub d_rx: f64,
    pub responsivity: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        Self {
            room: Vec3::new(5.0, 5.0, 3.5),
            tx_height: 3.0,
            phi_half_deg: 60.0,
            n_leds: 2,
            d_tx: 1.0,
            rx_height: 0.8,
            fov_deg: 85.0,
            area_m2: 1e-4,
            n_pds: 2,
            d_rx: 0.1,
            responsivity: 1.0,
        }
    }
}

fn centred_offsets(count: usize, spacing: f64) -> Option<Vec<(f64, f64)>> {
    let h = spacing / 2.0;
    match count {
        2 => Some(vec![(-h, 0.0), (h, 0.0)]),
        4 => Some(vec![(-h, -h), (h, -h), (-h, h), (h, h)]),
        _ => None,
    }
}

impl GeometryParams {
    pub fn build(&self) -> Result<Geometry, ChannelError> {
        if !(self.d_tx > 0.0 && self.d_tx.is_finite()) {
            return Err(ChannelError::InvalidParameter { what: "d_tx", value: self.d_tx });
        }
        if !(self.d_rx > 0.0 && self.d_rx.is_finite()) {
            return Err(ChannelError::InvalidParameter { what: "d_rx", value: self.d_rx });
        }
        let cx = self.room.x / 2.0;
        let cy = self.room.y / 2.0;
        let led_offsets =
            centred_offsets(self.n_leds, self.d_tx).ok_or(ChannelError::BadLedCount(self.n_leds))?;
        let pd_offsets =
            centred_offsets(self.n_pds, self.d_rx).ok_or(ChannelError::BadPdCount(self.n_pds))?;
        let leds = led_offsets
            .into_iter()
            .map(|(dx, dy)| {
                LedSpec::downward(Vec3::new(cx + dx, cy + dy, self.tx_height), self.phi_half_deg)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let pds = pd_offsets
            .into_iter()
            .map(|(dx, dy)| {
                PdSpec::upward(
                    Vec3::new(cx + dx, cy + dy, self.rx_height),
                    self.area_m2,
                    self.fov_deg,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Geometry::new(self.room, leds, pds, self.responsivity)
    }
}

/// Real-valued channel matrix, one row per detector, one column per LED.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl ChannelMatrix {
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == n_cols));
        Self { n_rows, n_cols, data: rows.concat() }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, col)).collect()
    }

    /// Sum of squared entries.
    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|h| h * h).sum()
    }

    /// Matrix with every entry multiplied by `s` (e.g. the responsivity).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|h| h * s).collect(),
        }
    }

    /// `y += H x` for one channel use.
    pub fn accumulate_product(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for (r, yi) in y.iter_mut().enumerate() {
            let row = self.row(r);
            *yi += row.iter().zip(x).map(|(h, xi)| h * xi).sum::<f64>();
        }
    }

    /// Table rendering with 9 significant digits per entry.
    pub fn format_table(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n_rows {
            let cells: Vec<String> =
                self.row(r).iter().map(|h| format!("{h:.8e}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Builds the gain matrix of a geometry, detector-major.
pub fn build_channel(geom: &Geometry) -> ChannelMatrix {
    let n_rows = geom.n_pds();
    let n_cols = geom.n_leds();
    let mut data = Vec::with_capacity(n_rows * n_cols);
    for pd in &geom.pds {
        for led in &geom.leds {
            data.push(channel_gain(led, pd));
        }
    }
    ChannelMatrix { n_rows, n_cols, data }
}

/// Average received electrical signal power across the detector array,
/// `P_r^2 = sigma_x^2 / (2 N_r) * sum_ij h_ij^2`, for per-LED drive signals
/// of mean square `sigma_x^2`.
pub fn received_power_sq(h: &ChannelMatrix, sigma_x: f64) -> f64 {
    sigma_x * sigma_x / (2.0 * h.n_rows() as f64) * h.sum_sq()
}

/// Noise standard deviation that realizes an average electrical SNR of
/// `snr_db` for received power `P_r^2` and responsivity `r`:
/// `sigma = sqrt(r^2 P_r^2 / 10^(snr/10))`.
///
/// `snr_db = +inf` yields a noiseless link (`sigma = 0`).
pub fn sigma_for_snr(snr_db: f64, responsivity: f64, pr_sq: f64) -> Result<f64, ChannelError> {
    if snr_db.is_nan() {
        return Err(ChannelError::InvalidSnr);
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    Ok((responsivity * responsivity * pr_sq / 10f64.powf(snr_db / 10.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(a.abs()).max(1e-300)
    }

    /// Scalar re-derivation through explicit angles, kept deliberately
    /// separate from the vector-algebra production path.
    fn gain_oracle(dx: f64, dy: f64, dz: f64, n: f64, area: f64, fov_deg: f64) -> f64 {
        let r = (dx * dx + dy * dy + dz * dz).sqrt();
        let phi = (dz / r).acos();
        let theta = phi; // parallel down-facing LED / up-facing detector
        if theta.to_degrees() > fov_deg {
            return 0.0;
        }
        (n + 1.0) / (2.0 * std::f64::consts::PI) * phi.cos().powf(n) * theta.cos() * area / (r * r)
    }

    #[test]
    fn mode_number_reference_angles() {
        assert!(close(mode_number(60.0).unwrap(), 1.0, 1e-12));
        assert!(close(mode_number(45.0).unwrap(), 2.0, 1e-12));
        assert!(close(mode_number(30.0).unwrap(), 4.81884167930642, 1e-12));
    }

    #[test]
    fn mode_number_rejects_degenerate_semiangles() {
        assert!(mode_number(0.0).is_err());
        assert!(mode_number(90.0).is_err());
        assert!(mode_number(-10.0).is_err());
        assert!(mode_number(f64::NAN).is_err());
    }

    #[test]
    fn gain_directly_below_led() {
        let led = LedSpec::downward(Vec3::new(2.5, 2.5, 3.0), 60.0).unwrap();
        let pd = PdSpec::upward(Vec3::new(2.5, 2.5, 0.8), 1e-4, 85.0).unwrap();
        let g = channel_gain(&led, &pd);
        // (n+1)/(2 pi) * A / dz^2 with n = 1, dz = 2.2
        assert!(close(g, 6.57665054098741e-6, 1e-12));
        assert!(close(g, gain_oracle(0.0, 0.0, 2.2, 1.0, 1e-4, 85.0), 1e-12));
    }

    #[test]
    fn gain_respects_field_of_view() {
        let led = LedSpec::downward(Vec3::new(0.0, 0.0, 1.0), 60.0).unwrap();
        // theta = atan(dx / 1.0); 85 deg edge is at dx = tan(85 deg) = 11.43
        let inside = PdSpec::upward(Vec3::new(11.0, 0.0, 0.0), 1e-4, 85.0).unwrap();
        let outside = PdSpec::upward(Vec3::new(12.0, 0.0, 0.0), 1e-4, 85.0).unwrap();
        assert!(channel_gain(&led, &inside) > 0.0);
        assert_eq!(channel_gain(&led, &outside), 0.0);
    }

    #[test]
    fn gain_includes_exact_fov_edge() {
        let led = LedSpec::downward(Vec3::new(0.0, 0.0, 1.0), 60.0).unwrap();
        // theta is exactly 45 degrees; a 45 degree FOV must still accept it
        let pd = PdSpec::upward(Vec3::new(1.0, 0.0, 0.0), 1e-4, 45.0).unwrap();
        let g = channel_gain(&led, &pd);
        assert!(g > 0.0);
        assert!(close(g, gain_oracle(1.0, 0.0, 1.0, 1.0, 1e-4, 45.1), 1e-12));
    }

    #[test]
    fn gain_zero_behind_emitter() {
        // Detector *above* a down-facing LED: cos phi < 0
        let led = LedSpec::downward(Vec3::new(0.0, 0.0, 1.0), 60.0).unwrap();
        let pd = PdSpec::upward(Vec3::new(0.1, 0.0, 2.0), 1e-4, 85.0).unwrap();
        assert_eq!(channel_gain(&led, &pd), 0.0);
    }

    #[test]
    fn default_two_by_two_matrix() {
        let geom = GeometryParams::default().build().unwrap();
        let h = build_channel(&geom);
        assert_eq!((h.n_rows(), h.n_cols()), (2, 2));
        // Mirror symmetry of the centred arrays
        assert!(close(h.get(0, 0), h.get(1, 1), 1e-14));
        assert!(close(h.get(0, 1), h.get(1, 0), 1e-14));
        // Frozen values for d_tx = 1, d_rx = 0.1, dz = 2.2:
        // same-side lateral offset 0.45 m, cross offset 0.55 m
        assert!(close(h.get(0, 0), 6.059037985274093e-6, 1e-12));
        assert!(close(h.get(0, 1), 5.825683524196461e-6, 1e-12));
        assert!(close(h.get(0, 0), gain_oracle(0.45, 0.0, 2.2, 1.0, 1e-4, 85.0), 1e-12));
        assert!(close(h.get(0, 1), gain_oracle(0.55, 0.0, 2.2, 1.0, 1e-4, 85.0), 1e-12));
    }

    #[test]
    fn four_by_four_grid_matrix() {
        let params = GeometryParams { n_leds: 4, n_pds: 4, ..GeometryParams::default() };
        let h = build_channel(&params.build().unwrap());
        assert_eq!((h.n_rows(), h.n_cols()), (4, 4));
        for i in 0..4 {
            assert!(close(h.get(i, i), 5.600212464836169e-6, 1e-12), "diagonal {i}");
        }
        // adjacent LED (one coordinate differs)
        assert!(close(h.get(0, 1), 5.3926231263739185e-6, 1e-12));
        assert!(close(h.get(0, 2), h.get(0, 1), 1e-14));
        // diagonally opposite LED (both coordinates differ)
        assert!(close(h.get(0, 3), 5.1963658595456085e-6, 1e-12));
        assert!(close(h.get(3, 0), h.get(0, 3), 1e-14));
        assert!(close(h.get(0, 0), gain_oracle(0.45, 0.45, 2.2, 1.0, 1e-4, 85.0), 1e-12));
        assert!(close(h.get(0, 3), gain_oracle(0.55, 0.55, 2.2, 1.0, 1e-4, 85.0), 1e-12));
    }

    #[test]
    fn received_power_reference_value() {
        let geom = GeometryParams::default().build().unwrap();
        let h = build_channel(&geom);
        let p = received_power_sq(&h, 1.0);
        assert!(close(p, 3.532526491554422e-11, 1e-12));
        // quadratic in sigma_x
        assert!(close(received_power_sq(&h, 2.0), 4.0 * p, 1e-14));
    }

    #[test]
    fn sigma_realizes_requested_snr() {
        let geom = GeometryParams::default().build().unwrap();
        let h = build_channel(&geom);
        let pr = received_power_sq(&h, 0.123);
        for snr in [0.0, 10.0, 25.5, 60.0, -3.0] {
            let sigma = sigma_for_snr(snr, 1.0, pr).unwrap();
            let realized = 10.0 * (pr / (sigma * sigma)).log10();
            assert!((realized - snr).abs() < 1e-9, "snr {snr} -> {realized}");
        }
        assert_eq!(sigma_for_snr(f64::INFINITY, 1.0, pr).unwrap(), 0.0);
        assert!(sigma_for_snr(f64::NAN, 1.0, pr).is_err());
    }

    #[test]
    fn geometry_rejects_out_of_room_arrays() {
        let params = GeometryParams { d_tx: 6.0, ..GeometryParams::default() };
        assert!(matches!(params.build(), Err(ChannelError::OutsideRoom { .. })));
        let params = GeometryParams { n_leds: 3, ..GeometryParams::default() };
        assert_eq!(params.build().unwrap_err(), ChannelError::BadLedCount(3));
    }

    #[test]
    fn matrix_helpers() {
        let h = ChannelMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(h.column(1), vec![2.0, 4.0]);
        assert_eq!(h.sum_sq(), 30.0);
        let s = h.scaled(2.0);
        assert_eq!(s.get(1, 0), 6.0);
        let mut y = vec![0.0; 2];
        h.accumulate_product(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 7.0]);
        assert_eq!(s.format_table(), "2.00000000e0 4.00000000e0\n6.00000000e0 8.00000000e0\n");
    }
}
