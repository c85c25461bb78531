# Contrast Enhancement Tests
