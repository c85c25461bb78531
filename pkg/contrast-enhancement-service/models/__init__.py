# Color Optimization Models Package
