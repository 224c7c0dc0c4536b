namespace disclab {}
