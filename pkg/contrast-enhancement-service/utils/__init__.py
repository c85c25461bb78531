# Color and Raster Utilities Package
