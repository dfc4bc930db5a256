pub mod exactness;
