"""Result files and charts."""
