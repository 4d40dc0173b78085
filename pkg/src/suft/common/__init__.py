# __init__.py for the common package
