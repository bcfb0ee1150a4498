# This file makes the tests directory a package, enabling relative imports in test modules.