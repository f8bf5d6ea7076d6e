// placeholder, replaced by the solver implementation
