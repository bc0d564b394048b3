use graded_chain::density::*;
use graded_chain::ChainSpec;
fn main(){
 let s=ChainSpec::unit_mass(7,0.05,1.0).unwrap();
 let e=s.band_edges(); println!("{e:?}");
 println!("{:?}", normalization_integral(&s,&QuadConfig::default()));
 let sum2=e.upper.powi(2)+e.lower.powi(2); let span2=e.squared_span();
 for phi in [0.0134, 0.1, 1.0, 3.1] { let w=(0.5*(sum2-span2*f64::cos(phi))).sqrt(); println!("{phi} {w} {:?}", mode_density(&s,w)); }
}
