"""Physics front-ends that assemble model-specific inputs for the solvers."""
