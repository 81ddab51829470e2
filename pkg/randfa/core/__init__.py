# Core module: settings, logging, metrics and errors
